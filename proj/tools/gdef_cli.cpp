// gdef: command-line front end over the library.
//
//   gdef check    <chart>              residual tables of the chart
//   gdef species  <chart>              trivial holonomy at the basepoint
//   gdef moduli   <chart>              sampled moduli set and its indices
//   gdef deform   <chart> --phi|--mu   structural residuals of a deformation
//   gdef immerse  <chart> --phi|--mu   integrated immersion, CSV samples
//   gdef curves   <chart>              curve-pair analysis of a [curves] section
//   gdef gallery  [name]               list, print or export built-in charts
//
// <chart> is a path or gallery:<name>. Exit codes: 0 every gate passed,
// 1 the computation raised, 2 a gate failed, 64 usage, 65 malformed input.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <typeinfo>

#include <cxxabi.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gdef/chart_file.hpp"
#include "gdef/curves.hpp"
#include "gdef/deform.hpp"
#include "gdef/errors.hpp"
#include "gdef/gallery.hpp"
#include "gdef/moduli.hpp"
#include "gdef/sbrana.hpp"

using json = nlohmann::ordered_json;
using namespace gdef;

namespace {

// Unqualified class name of a library error, e.g. "WrongDimension".
std::string error_kind(const Error& e) {
  int status = 0;
  char* raw = abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status);
  std::string name = status == 0 ? raw : typeid(e).name();
  std::free(raw);
  const auto colon = name.rfind("::");
  return colon == std::string::npos ? name : name.substr(colon + 2);
}

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitGate = 2;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;

struct RunConfig {
  std::string command;
  std::string input;
  std::vector<int> grid;  // empty, one count for every axis, or one per axis
  double tol = -1.0;      // < 0 selects the command default
  int jet_order = -1;
  std::vector<double> basepoint;
  std::string phi;
  int mu = -1;
  std::string out;
  std::uint64_t seed = 7;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json complex_json(cd z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

json vector_json(const VectorC& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(complex_json(v(i)));
  return a;
}

json columns_json(const MatrixC& m) {
  json a = json::array();
  for (int k = 0; k < m.cols(); ++k) a.push_back(vector_json(m.col(k)));
  return a;
}

class Report {
 public:
  Report(const RunConfig& cfg, const std::string& name) {
    doc_["schema"] = "gdef-report/1";
    doc_["command"] = cfg.command;
    doc_["input"] = name;
    doc_["seed"] = cfg.seed;
    doc_["results"] = json::object();
    doc_["gates"] = json::array();
  }
  json& results() { return doc_["results"]; }
  void gate(const std::string& table, double value, double limit) {
    const bool ok = std::isfinite(value) && value <= limit;
    doc_["gates"].push_back({{"table", table}, {"value", value}, {"limit", limit}, {"pass", ok}});
    if (!ok && failing_.empty()) failing_ = table;
    if (!ok) failures_.push_back(table);
  }
  void error(const std::string& kind, const std::string& what) {
    doc_["error"] = {{"kind", kind}, {"message", what}};
    errored_ = true;
  }
  int exit_code() const {
    if (errored_) return kExitError;
    return failures_.empty() ? kExitOk : kExitGate;
  }
  std::string status() const {
    if (errored_) return "error";
    return failures_.empty() ? "pass" : "fail";
  }
  const std::vector<std::string>& failures() const { return failures_; }
  json finish() {
    doc_["status"] = status();
    return doc_;
  }

 private:
  json doc_;
  std::string failing_;
  std::vector<std::string> failures_;
  bool errored_ = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

ChartFile load_input(const std::string& input) {
  const std::string prefix = "gallery:";
  if (input.rfind(prefix, 0) == 0) {
    try {
      return gallery_chart(input.substr(prefix.size()));
    } catch (const std::out_of_range& e) {
      throw UsageError(e.what());
    }
  }
  if (!std::filesystem::exists(input)) throw UsageError("no such file: " + input);
  return load_chart_file(input);
}

void apply_overrides(const RunConfig& cfg, ChartFile& cf) {
  if (!cf.chart) return;
  const int d = cf.chart->dims();
  if (cfg.grid.size() == 1) {
    cf.grid = cf.grid.resampled(cfg.grid[0]);
  } else if (!cfg.grid.empty()) {
    if (static_cast<int>(cfg.grid.size()) != d) throw UsageError("--grid needs one count or one per axis");
    cf.grid.n = cfg.grid;
  }
  for (int k : cf.grid.n)
    if (k < 1) throw UsageError("--grid counts must be positive");
  if (!cfg.basepoint.empty()) {
    if (static_cast<int>(cfg.basepoint.size()) != d) throw UsageError("--basepoint needs one value per axis");
    cf.basepoint = cfg.basepoint;
  }
}

const ConjugateChart& need_chart(const ChartFile& cf) {
  if (!cf.chart) throw UsageError("input has no chart");
  return *cf.chart;
}

double pick(double configured, double fallback) { return configured > 0 ? configured : fallback; }

// --- commands ---------------------------------------------------------------

void cmd_check(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  const double tol = pick(cfg.tol, 1e-8);
  if (!cf.chart) {
    const OrthogonalSplit split = orthogonal_split(*cf.curves);
    rep.results()["containment"] = split.containment_residual;
    rep.results()["orthogonality"] = split.orthogonality_residual;
    rep.gate("split.containment", split.containment_residual, tol);
    rep.gate("split.orthogonality", split.orthogonality_residual, tol);
    return;
  }
  const ConjugateChart& chart = *cf.chart;
  const auto points = chart_points(chart, cf.grid);
  json& r = rep.results();
  r["p"] = chart.p();
  r["s"] = chart.s();
  r["points"] = points.size();
  const ConjugationCheck cc = conjugation_check(chart, points);
  r["conjugation"] = {{"christoffel", cc.christoffel}, {"metric", cc.metric}};
  rep.gate("conjugation.christoffel", cc.christoffel, tol);
  rep.gate("conjugation.metric", cc.metric, tol);
  const double omega = omega_conjugation_residual(chart, points);
  r["omega_conjugation"] = omega;
  rep.gate("omega_conjugation", omega, tol);
  const IntegrabilityResult ir = integrability_residual(chart, points);
  r["integrability"] = {{"vacuous", ir.vacuous}, {"residual", ir.max_residual}};
  rep.gate("integrability", ir.max_residual, tol);
  if (chart.p() == 1 && chart.s() == 0) r["intersection_type_residual"] = intersection_type_residual(chart, points);
  if (chart.has_immersion()) {
    const GeometricConsistency gc = geometric_consistency(chart, points);
    r["geometry"] = {{"metric", gc.metric}, {"unit_norm", gc.unit_norm}, {"dmz", gc.dmz}};
    rep.gate("geometry.metric", gc.metric, tol);
    rep.gate("geometry.unit_norm", gc.unit_norm, tol);
    rep.gate("geometry.dmz", gc.dmz, tol);
  }
}

HolonomyOptions holonomy_options(const RunConfig& cfg) {
  HolonomyOptions o;
  o.jet_order = cfg.jet_order;
  o.seed = cfg.seed;
  return o;
}

json holonomy_json(const SbranaHolonomy& h) {
  json j;
  j["species"] = h.species;
  j["rank"] = h.rank;
  j["generic"] = h.generic;
  j["singular_values"] = h.singular_values;
  j["threshold"] = h.threshold;
  j["real_kernel"] = columns_json(h.real_kernel);
  if (h.generic) j["witness"] = vector_json(h.witness);
  j["witness_score"] = h.witness_score;
  j["annihilation"] = h.annihilation;
  j["stable_next_level"] = h.stable_next_level;
  j["cross_check_residual"] = h.cross_check_residual;
  return j;
}

void cmd_species(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  const ConjugateChart& chart = need_chart(cf);
  const SbranaHolonomy h = trivial_holonomy(chart, cf.basepoint, holonomy_options(cfg));
  rep.results()["basepoint"] = cf.basepoint;
  rep.results()["holonomy"] = holonomy_json(h);
  const double tol = pick(cfg.tol, 1e-8);
  rep.gate("holonomy.annihilation", h.annihilation, tol);
  rep.gate("holonomy.cross_check", h.cross_check_residual, std::max(tol, 1e-6));
  rep.gate("holonomy.next_level", h.stable_next_level ? 0.0 : 1.0, 0.0);
}

ModuliDescription run_moduli(const RunConfig& cfg, const ConjugateChart& chart, const SbranaHolonomy& h) {
  ModuliOptions mo;
  mo.seed = cfg.seed;
  return moduli_space(chart, h, mo);
}

void cmd_moduli(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  const ConjugateChart& chart = need_chart(cf);
  const SbranaHolonomy h = trivial_holonomy(chart, cf.basepoint, holonomy_options(cfg));
  const ModuliDescription m = run_moduli(cfg, chart, h);
  json& r = rep.results();
  r["species"] = h.species;
  r["empty"] = m.empty;
  r["dimension"] = m.dimension;
  r["samples"] = m.samples.size();
  r["attempts"] = m.attempts;
  json hist = json::object();
  for (const auto& [index, count] : m.index_histogram)
    hist[std::to_string(ambient_index(index, chart.p(), chart.eps()))] = count;
  r["ambient_index_histogram"] = hist;
  json buckets = json::object();
  for (const auto& [signs, count] : m.index_zero_buckets) buckets[signs] = count;
  r["index_zero_buckets"] = buckets;
  r["index_zero_bucket_count"] = m.index_zero_buckets.size();
  double worst = 0.0;
  for (const auto& s : m.samples) worst = std::max(worst, std::abs(1.0 + s.phi.sum()));
  r["sum_defect"] = worst;
  rep.gate("moduli.sum_defect", worst, pick(cfg.tol, 1e-9));
}

VectorC parse_phi(const std::string& text) {
  std::vector<cd> vals;
  for (const auto& item : split_list(text)) {
    try {
      vals.push_back(evaluate(parse(item, 0), {}));
    } catch (const Error& e) {
      throw UsageError("--phi entry '" + item + "': " + e.what());
    }
  }
  VectorC v(static_cast<int>(vals.size()));
  for (std::size_t k = 0; k < vals.size(); ++k) v(static_cast<int>(k)) = vals[k];
  return v;
}

VectorC choose_phi(const RunConfig& cfg, const ConjugateChart& chart, const std::vector<double>& basepoint,
                   json& r) {
  if (!cfg.phi.empty()) {
    VectorC phi = parse_phi(cfg.phi);
    if (phi.size() != chart.dims()) throw UsageError("--phi needs p + 1 entries");
    return phi;
  }
  if (cfg.mu < 0) throw UsageError("give --phi or --mu");
  const SbranaHolonomy h = trivial_holonomy(chart, basepoint, holonomy_options(cfg));
  const ModuliDescription m = run_moduli(cfg, chart, h);
  for (const auto& s : m.samples)
    if (ambient_index(s.index, chart.p(), chart.eps()) == cfg.mu) {
      r["phi_source"] = "moduli sample";
      return s.phi;
    }
  throw NotAdmissible("no sampled admissible tuple has ambient index " + std::to_string(cfg.mu));
}

json conditions_json(const ConditionReport& c) {
  json j;
  j["q_gamma"] = c.q_gamma;
  j["hessian_commutation"] = c.hessian_commutation;
  j["alpha_offdiagonal"] = c.alpha_offdiagonal;
  j["codazzi"] = c.codazzi;
  j["ricci"] = c.ricci;
  j["sum_identity"] = c.sum_identity;
  j["antisymmetry"] = c.antisymmetry;
  j["section"] = c.section;
  j["skipped"] = c.skipped;
  return j;
}

TransportOptions transport_options(const RunConfig& cfg) {
  TransportOptions t;
  if (cfg.tol > 0) t.tol = std::min(t.tol, cfg.tol * 1e-2);
  return t;
}

void cmd_deform(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  const ConjugateChart& chart = need_chart(cf);
  json& r = rep.results();
  const VectorC phi = choose_phi(cfg, chart, cf.basepoint, r);
  r["phi"] = vector_json(phi);
  const DeformationPackage pkg = build_package(chart, cf.grid, phi, cf.basepoint, transport_options(cfg));
  r["admissible"] = pkg.admissible;
  if (!pkg.admissible) r["admissibility_failure"] = pkg.admissibility_failure;
  r["index"] = pkg.index;
  r["ambient_index"] = ambient_index(pkg.index, chart.p(), chart.eps());
  r["index_constant"] = pkg.index_constant;
  r["sweep_residual"] = pkg.sweep_residual;
  const ConditionReport c = verify_conditions(pkg);
  r["conditions"] = conditions_json(c);
  rep.gate("deform.admissible", pkg.admissible ? 0.0 : 1.0, 0.0);
  rep.gate("deform.conditions", c.max(), pick(cfg.tol, 1e-7));
}

std::string csv_path(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".json") return p.replace_extension(".csv").string();
  return out + ".csv";
}

void write_csv(const std::string& path, const ImmersionResult& res, int base_dims) {
  std::ofstream f(path);
  if (!f) throw std::ios_base::failure("cannot write " + path);
  f << "# dimension=" << res.ambient_dim << " signature=";
  for (int k = 0; k < res.signature.size(); ++k) f << (k ? "," : "") << res.signature(k);
  f << "\n";
  const int cols = static_cast<int>(res.samples.cols());
  const int fiber = cols - base_dims - res.ambient_dim;
  std::vector<std::string> head;
  for (int k = 0; k < base_dims; ++k) head.push_back("x" + std::to_string(k));
  for (int k = 0; k < fiber; ++k) head.push_back("t" + std::to_string(k));
  for (int k = 0; k < res.ambient_dim; ++k) head.push_back("X" + std::to_string(k));
  for (std::size_t k = 0; k < head.size(); ++k) f << (k ? "," : "") << head[k];
  f << "\n";
  char buf[32];
  for (int i = 0; i < res.samples.rows(); ++i) {
    for (int j = 0; j < cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.12g", res.samples(i, j));
      f << (j ? "," : "") << buf;
    }
    f << "\n";
  }
}

void cmd_immerse(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  const ConjugateChart& chart = need_chart(cf);
  json& r = rep.results();
  const VectorC phi = choose_phi(cfg, chart, cf.basepoint, r);
  r["phi"] = vector_json(phi);
  const GaussData gd(chart, cf.basepoint);
  const DeformationPackage pkg = build_package(chart, cf.grid, phi, cf.basepoint, transport_options(cfg));
  const ImmersionResult res = integrate_immersion(gd, pkg);
  r["ambient_dim"] = res.ambient_dim;
  r["signature"] = std::vector<double>(res.signature.data(), res.signature.data() + res.signature.size());
  r["ambient_index"] = res.index;
  r["pullback_residual"] = res.pullback_residual;
  r["sweep_residual"] = res.sweep_residual;
  r["flatness_residual"] = res.flatness_residual;
  r["gauss_identity_residual"] = res.gauss_identity_residual;
  r["frame_drift"] = res.frame_drift;
  r["error_estimate"] = res.error_estimate;
  r["conditions"] = conditions_json(res.conditions);
  r["samples"] = res.samples.rows();
  if (!cfg.out.empty()) {
    const std::string path = csv_path(cfg.out);
    write_csv(path, res, chart.dims());
    r["csv"] = std::filesystem::path(path).filename().string();
  }
  const double tol = pick(cfg.tol, 1e-4);
  rep.gate("immerse.pullback", res.pullback_residual, tol);
  rep.gate("immerse.sweep", res.sweep_residual, tol);
}

void cmd_curves(const RunConfig& cfg, const ChartFile& cf, Report& rep) {
  if (!cf.curves) throw UsageError("input has no [curves] section");
  const CurvePair& pair = *cf.curves;
  json& r = rep.results();
  const SharedDimension sd = shared_dimension(pair);
  r["shared_dimension"] = sd.rank;
  r["singular_values"] = sd.singular_values;
  const OrthogonalSplit split = orthogonal_split(pair);
  r["split"] = {{"span1", split.dim_span1},
                {"span2", split.dim_span2},
                {"shared", split.l},
                {"containment", split.containment_residual},
                {"orthogonality", split.orthogonality_residual}};
  const double tol = pick(cfg.tol, 1e-8);
  rep.gate("split.containment", split.containment_residual, tol);
  rep.gate("split.orthogonality", split.orthogonality_residual, tol);
  try {
    const HonestInterval hi = honest_interval(pair);
    r["interval"] = {{"lo", hi.lo}, {"hi", hi.hi}, {"projected1", hi.projected1}, {"projected2", hi.projected2}};
  } catch (const Error& e) {
    // Not every pair is polar; the interval is reported as unavailable.
    r["interval"] = {{"unavailable", e.what()}};
  }
}

int cmd_gallery(const RunConfig& cfg) {
  if (!cfg.input.empty()) {
    try {
      std::cout << gallery_entry(cfg.input).text;
    } catch (const std::out_of_range& e) {
      std::cerr << "gdef: " << e.what() << "\n";
      return kExitUsage;
    }
    return kExitOk;
  }
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    for (const auto& e : gallery()) {
      std::ofstream f(std::filesystem::path(cfg.out) / (e.name + ".chart"));
      f << e.text;
    }
    std::cout << "wrote " << gallery().size() << " entries to " << cfg.out << "\n";
    return kExitOk;
  }
  for (const auto& e : gallery()) std::cout << e.name << "\n";
  return kExitOk;
}

int run(const RunConfig& cfg) {
  if (cfg.command == "gallery") return cmd_gallery(cfg);
  if (cfg.input.empty()) throw UsageError(cfg.command + " needs a chart file or gallery:<name>");
  ChartFile cf = load_input(cfg.input);
  apply_overrides(cfg, cf);
  Report rep(cfg, cf.name.empty() ? cfg.input : cf.name);
  try {
    if (cfg.command == "check") cmd_check(cfg, cf, rep);
    else if (cfg.command == "species") cmd_species(cfg, cf, rep);
    else if (cfg.command == "moduli") cmd_moduli(cfg, cf, rep);
    else if (cfg.command == "deform") cmd_deform(cfg, cf, rep);
    else if (cfg.command == "immerse") cmd_immerse(cfg, cf, rep);
    else if (cfg.command == "curves") cmd_curves(cfg, cf, rep);
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    rep.error(error_kind(e), e.what());
  }
  const json doc = rep.finish();
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out);
    if (!f) throw UsageError("cannot write " + cfg.out);
    f << text;
  }
  std::ostream& human = cfg.out.empty() ? std::cerr : std::cout;
  human << cfg.command << " " << doc["input"].get<std::string>() << ": " << rep.status();
  for (const auto& t : rep.failures()) human << " [" << t << "]";
  if (doc.contains("error")) human << " " << doc["error"]["message"].get<std::string>();
  human << "\n";
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugate charts, Sbrana holonomy and deformations of rank p+1 hypersurfaces"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string grid_text, basepoint_text;
  const std::pair<const char*, const char*> commands[] = {
      {"check", "DMZ, integrability, Laplace invariants and conjugation residuals"},
      {"species", "trivial holonomy of the Sbrana bundle and the species"},
      {"moduli", "sample the admissible tuples over the holonomy kernel"},
      {"deform", "extend a tuple over the grid and verify the structural conditions"},
      {"immerse", "integrate the deformed immersion and write samples as CSV"},
      {"curves", "shared dimension, orthogonal split and honest interval of a curve pair"},
      {"gallery", "list the built-in charts or export them with --out"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("input", cfg.input, "chart file or gallery:<name> (gallery: entry name)");
    sub->add_option("--grid", grid_text, "nodes per axis: one count or a comma list");
    sub->add_option("--tol", cfg.tol, "gate tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--jet-order", cfg.jet_order, "Taylor order of the curvature stack")
        ->check(CLI::Range(2, 32));
    sub->add_option("--basepoint", basepoint_text, "comma list of real parameters");
    sub->add_option("--phi", cfg.phi, "comma list of complex numbers at the basepoint");
    sub->add_option("--mu", cfg.mu, "ambient index of a sampled tuple")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", cfg.out, "report path (gallery: export directory)");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->callback([&cfg, name] { cfg.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    for (const auto& t : split_list(grid_text)) cfg.grid.push_back(std::stoi(t));
    for (const auto& t : split_list(basepoint_text)) cfg.basepoint.push_back(std::stod(t));
    return run(cfg);
  } catch (const UsageError& e) {
    std::cerr << "gdef: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "gdef: malformed number in --grid or --basepoint\n";
    return kExitUsage;
  } catch (const ChartFormatError& e) {
    std::cerr << "gdef: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "gdef: " << e.what() << "\n";
    return kExitError;
  }
}
