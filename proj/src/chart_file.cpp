#include "gdef/chart_file.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gdef/errors.hpp"

namespace gdef {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ChartFormatError("line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') fail(line, "expected a number, got '" + s + "'");
  return v;
}

std::vector<double> numbers(const std::string& s, int line) {
  std::vector<double> out;
  for (auto& t : split(s, ',')) out.push_back(to_double(t, line));
  return out;
}

int to_int(const std::string& s, int line) {
  const double v = to_double(s, line);
  if (static_cast<int>(v) != v) fail(line, "expected an integer, got '" + s + "'");
  return static_cast<int>(v);
}

// "G_3_1" -> {3, 1}
std::vector<int> indices(const std::string& key, const std::string& prefix, int line) {
  if (key.rfind(prefix, 0) != 0) fail(line, "unexpected key '" + key + "'");
  std::vector<int> out;
  for (auto& t : split(key.substr(prefix.size()), '_')) out.push_back(to_int(t, line));
  return out;
}

struct Entry {
  std::string key, value;
  int line;
};

}  // namespace

ChartFile parse_chart_file(const std::string& text) {
  std::map<std::string, std::vector<Entry>> sections;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      sections[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    if (section.empty()) fail(line, "entry outside a section");
    sections[section].push_back({trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
  }

  ChartFile cf;
  auto get = [&](const std::string& sec) -> const std::vector<Entry>& {
    static const std::vector<Entry> none;
    auto it = sections.find(sec);
    return it == sections.end() ? none : it->second;
  };

  if (sections.count("meta")) {
    int p = -1, s = -1, eps = 1, meta_line = 0;
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : get("meta")) {
      meta_line = e.line;
      if (e.key == "name") cf.name = e.value;
      else if (e.key == "p") p = to_int(e.value, e.line);
      else if (e.key == "s") s = to_int(e.value, e.line);
      else if (e.key == "ambient") {
        if (e.value == "sphere") eps = 1;
        else if (e.value == "hyperbolic") eps = -1;
        else fail(e.line, "ambient must be sphere or hyperbolic");
      } else if (e.key == "pairs") {
        for (auto& t : split(e.value, ',')) {
          auto ab = split(t, '-');
          if (ab.size() != 2) fail(e.line, "pairs are written a-b");
          pairs.push_back({to_int(ab[0], e.line), to_int(ab[1], e.line)});
        }
      } else
        fail(e.line, "unknown meta key '" + e.key + "'");
    }
    const bool chart_sections = sections.count("christoffel") || sections.count("metric") ||
                                sections.count("immersion") || sections.count("support");
    if (p < 0 && (chart_sections || !sections.count("curves"))) fail(meta_line, "[meta] needs p");
    if (p >= 0) {
      if (s < 0) s = static_cast<int>(pairs.size());
      if (s != static_cast<int>(pairs.size())) fail(meta_line, "s does not match the number of pairs");
      try {
        cf.chart.emplace(p, pairs, eps);
        ConjugateChart& ch = *cf.chart;
        const int dims = p + 1;
        for (const auto& e : get("christoffel")) {
          auto ij = indices(e.key, "G_", e.line);
          if (ij.size() != 2) fail(e.line, "Christoffel keys are G_j_i");
          ch.set_christoffel(ij[0], ij[1], parse(e.value, dims));
        }
        for (const auto& e : get("metric")) {
          auto ij = indices(e.key, "g_", e.line);
          if (ij.size() != 2) fail(e.line, "metric keys are g_i_j");
          ch.set_metric(ij[0], ij[1], parse(e.value, dims));
        }
        std::map<int, Expr> h;
        for (const auto& e : get("immersion")) {
          auto k = indices(e.key, "h_", e.line);
          if (k.size() != 1) fail(e.line, "immersion keys are h_k");
          h[k[0]] = parse(e.value, dims);
        }
        if (!h.empty()) {
          std::vector<Expr> hv;
          for (int k = 0; k < static_cast<int>(h.size()); ++k) {
            if (!h.count(k)) fail(0, "immersion components must be h_0..h_n without gaps");
            hv.push_back(h[k]);
          }
          ch.set_immersion(hv);
        }
        for (const auto& e : get("support")) {
          if (e.key != "gamma") fail(e.line, "support key is gamma");
          ch.set_support(parse(e.value, dims));
        }
      } catch (const SyntaxError& err) {
        throw ChartFormatError(std::string("expression: ") + err.what());
      } catch (const UnknownSymbol& err) {
        throw ChartFormatError(std::string("expression: ") + err.what());
      }
      const int dims = p + 1;
      cf.grid.lo.assign(dims, 0.0);
      cf.grid.hi.assign(dims, 1.0);
      cf.grid.n.assign(dims, 5);
    }
  }

  for (const auto& e : get("grid")) {
    if (e.key == "lo") cf.grid.lo = numbers(e.value, e.line);
    else if (e.key == "hi") cf.grid.hi = numbers(e.value, e.line);
    else if (e.key == "n") {
      cf.grid.n.clear();
      for (double v : numbers(e.value, e.line)) cf.grid.n.push_back(static_cast<int>(v));
    } else if (e.key == "basepoint") cf.basepoint = numbers(e.value, e.line);
    else fail(e.line, "unknown grid key '" + e.key + "'");
  }
  if (cf.chart) {
    const std::size_t dims = cf.chart->dims();
    if (cf.grid.lo.size() != dims || cf.grid.hi.size() != dims || cf.grid.n.size() != dims)
      throw ChartFormatError("grid lo/hi/n need one entry per coordinate");
    for (int k : cf.grid.n)
      if (k < 1) throw ChartFormatError("grid resolution must be positive");
    if (cf.basepoint.empty())
      for (std::size_t a = 0; a < dims; ++a) cf.basepoint.push_back(0.5 * (cf.grid.lo[a] + cf.grid.hi[a]));
    if (cf.basepoint.size() != dims) throw ChartFormatError("basepoint needs one entry per coordinate");
  }

  if (sections.count("curves")) {
    CurvePair cp;
    std::map<int, Expr> a1, a2;
    for (const auto& e : get("curves")) {
      if (e.key == "signature") {
        auto v = numbers(e.value, e.line);
        cp.signature = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
      } else if (e.key == "u" || e.key == "v" || e.key == "basepoint") {
        auto v = numbers(e.value, e.line);
        if (v.size() != 2) fail(e.line, e.key + " needs two numbers");
        if (e.key == "u") cp.u_lo = v[0], cp.u_hi = v[1];
        else if (e.key == "v") cp.v_lo = v[0], cp.v_hi = v[1];
        else cp.u_base = v[0], cp.v_base = v[1];
      } else if (e.key.rfind("alpha1_", 0) == 0) {
        a1[indices(e.key, "alpha1_", e.line).at(0)] = parse(e.value, 1);
      } else if (e.key.rfind("alpha2_", 0) == 0) {
        a2[indices(e.key, "alpha2_", e.line).at(0)] = parse(e.value, 1);
      } else
        fail(e.line, "unknown curves key '" + e.key + "'");
    }
    const int N = static_cast<int>(cp.signature.size());
    if (N == 0) throw ChartFormatError("[curves] needs a signature");
    for (int k = 0; k < N; ++k) {
      cp.alpha1.push_back(a1.count(k) ? a1[k] : make_number(0.0));
      cp.alpha2.push_back(a2.count(k) ? a2[k] : make_number(0.0));
    }
    if (static_cast<int>(a1.size()) > N || static_cast<int>(a2.size()) > N)
      throw ChartFormatError("curve has more components than the signature");
    cp.transform = Eigen::MatrixXd::Identity(N, N);
    cf.curves = cp;
  }

  for (const auto& e : get("expected")) cf.expected[e.key] = e.value;
  if (!cf.chart && !cf.curves) throw ChartFormatError("file defines neither a chart nor curves");
  return cf;
}

ChartFile load_chart_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_chart_file(ss.str());
}

}  // namespace gdef
