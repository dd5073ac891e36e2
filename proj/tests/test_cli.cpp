#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("gdef_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout captured; stderr is discarded.
CliRun gdef(const std::string& args) {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(GDEF_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  return r;
}

json report(const std::string& args) {
  const CliRun r = gdef(args);
  EXPECT_EQ(r.code, 0) << args;
  return json::parse(r.out);
}

}  // namespace

TEST(Cli, CheckPassesOnTheFlatTorus) {
  const CliRun r = gdef(std::string("check ") + GDEF_GALLERY_DIR + "/flat_torus_p2.chart");
  EXPECT_EQ(r.code, 0);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["schema"], "gdef-report/1");
  EXPECT_EQ(doc["status"], "pass");
  for (const auto& g : doc["gates"]) EXPECT_TRUE(g["pass"].get<bool>()) << g["table"];
}

TEST(Cli, BrokenConjugationNamesTheTable) {
  std::string text = slurp(fs::path(GDEF_GALLERY_DIR) / "complex_pair_p1.chart");
  const std::string good = "(0.3-0.2*i)*u0";
  text.replace(text.find(good), good.size(), "(0.3+0.2*i)*u0");
  const fs::path broken = scratch() / "broken.chart";
  std::ofstream(broken) << text;
  const CliRun r = gdef("check " + broken.string());
  EXPECT_EQ(r.code, 2);
  const json doc = json::parse(r.out);
  EXPECT_EQ(doc["status"], "fail");
  bool named = false;
  for (const auto& g : doc["gates"])
    if (!g["pass"].get<bool>() && g["table"] == "conjugation.christoffel") named = true;
  EXPECT_TRUE(named);
}

TEST(Cli, MissingFileIsAUsageError) { EXPECT_EQ(gdef("check /nonexistent/chart.chart").code, 64); }

TEST(Cli, MalformedChartIsADataError) {
  const fs::path bad = scratch() / "bad.chart";
  std::ofstream(bad) << "[meta]\np = 1\n[christoffel]\nG_0_1 = sin(\n";
  EXPECT_EQ(gdef("check " + bad.string()).code, 65);
}

TEST(Cli, UnknownFlagIsAUsageError) { EXPECT_EQ(gdef("check gallery:flat_torus_p1 --bogus").code, 64); }

TEST(Cli, SpeciesOfGalleryCharts) {
  EXPECT_EQ(report("species gallery:flat_torus_p2")["results"]["holonomy"]["species"], 1);
  EXPECT_EQ(report("species gallery:intersection_p1")["results"]["holonomy"]["species"], 1);
  EXPECT_EQ(report("species gallery:second_species_p1")["results"]["holonomy"]["species"], 2);
  EXPECT_EQ(report("species gallery:full_rank_p1")["results"]["holonomy"]["species"], 3);
  EXPECT_EQ(report("moduli gallery:full_rank_p1")["results"]["empty"], true);
}

TEST(Cli, ModuliOnTheTorus) {
  const json doc = report("moduli gallery:flat_torus_p1");
  EXPECT_EQ(doc["results"]["dimension"], 1);
  EXPECT_EQ(doc["results"]["index_zero_bucket_count"], 2);
}

TEST(Cli, ReportsAreByteIdentical) {
  const fs::path a = scratch() / "a.json", b = scratch() / "b.json";
  ASSERT_EQ(gdef("moduli gallery:flat_torus_p2 --seed 11 --out " + a.string()).code, 0);
  ASSERT_EQ(gdef("moduli gallery:flat_torus_p2 --seed 11 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST(Cli, ImmerseWritesCsv) {
  const fs::path out = scratch() / "torus.json";
  const CliRun r = gdef("immerse gallery:flat_torus_p1 --phi 1,-2 --out " + out.string());
  ASSERT_EQ(r.code, 0);
  const json doc = json::parse(slurp(out));
  EXPECT_LT(doc["results"]["pullback_residual"].get<double>(), 1e-4);
  std::ifstream csv(scratch() / "torus.csv");
  std::string header, columns;
  std::getline(csv, header);
  std::getline(csv, columns);
  EXPECT_EQ(header, "# dimension=4 signature=1,1,1,1");
  EXPECT_EQ(columns.substr(0, 6), "x0,x1,");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 16 * 16 * 3);
}

TEST(Cli, CurvesSharedDimension) {
  EXPECT_EQ(report("curves gallery:cos_pair")["results"]["shared_dimension"], 2);
  EXPECT_EQ(report("curves gallery:exp_pair")["results"]["shared_dimension"], 1);
}

TEST(Cli, TightGateFailsTheRun) {
  // The pullback residual sits near 1e-10 on a coarse grid.
  EXPECT_EQ(gdef("immerse gallery:flat_torus_p1 --phi 1,-2 --grid 5 --tol 1e-12").code, 2);
}

TEST(Cli, LibraryErrorsAreReported) {
  const CliRun r = gdef("immerse gallery:flat_torus_p1 --phi 1,-2 --grid 4");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.out)["error"]["kind"], "WrongDimension");
}
