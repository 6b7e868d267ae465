#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hardy/error.hpp"
#include "hardy/experiments.hpp"

namespace hardy {

namespace {

int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Walks the quoted keys of a path in order; good enough to point at the
// offending line of a hand-written config.
class Locator {
 public:
  Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  int line(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto at = text_.find('"' + key + '"', pos);
      if (at == std::string::npos) return 0;
      pos = at + key.size() + 2;
    }
    return path.empty() ? 1 : line_at(text_, pos);
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
    std::string dotted;
    for (const auto& k : path) dotted += (dotted.empty() ? "" : ".") + k;
    const int l = line(path);
    throw ConfigError(l > 0 ? fmt::format("{}:{}: {}: {}", source_, l, dotted, what)
                            : fmt::format("{}: {}: {}", source_, dotted, what));
  }

 private:
  const std::string& text_;
  std::string source_;
};

class Reader {
 public:
  Reader(const Json& j, const Locator& loc, std::vector<std::string> path) : j_(j), loc_(loc), path_(std::move(path)) {
    if (!j_.is_object()) loc_.fail(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) loc_.fail(at(k), "unknown key");
  }

  bool has(const char* key) const { return j_.contains(key); }

  Reader child(const char* key) const { return Reader(j_.at(key), loc_, at(key)); }

  template <class T>
  void get(const char* key, T& out) const {
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      loc_.fail(at(key), "wrong type");
    }
  }

  template <class Pred>
  void check(const char* key, bool ok, Pred&& message) const {
    if (!ok) loc_.fail(at(key), message());
  }

  std::vector<std::string> at(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  const Locator& locator() const { return loc_; }

 private:
  const Json& j_;
  const Locator& loc_;
  std::vector<std::string> path_;
};

void read_grid(const Reader& r, GridSpec& g) {
  r.allow({"sizes", "spacing", "boundary"});
  r.get("sizes", g.sizes);
  r.check("sizes", !g.sizes.empty() && g.sizes.size() <= 2, [] { return "expected one or two axis sizes"; });
  r.check("sizes", std::all_of(g.sizes.begin(), g.sizes.end(), [](int n) { return n >= 2; }),
          [] { return "every axis needs at least 2 nodes"; });
  r.get("spacing", g.spacing);
  r.check("spacing", g.spacing >= 0.0, [] { return "spacing must be positive (0 selects 1/n)"; });
  std::string b = to_string(g.boundary);
  r.get("boundary", b);
  try {
    g.boundary = boundary_from_string(b);
  } catch (const InvalidArgument& e) {
    r.locator().fail(r.at("boundary"), e.what());
  }
}

void read_coefficients(const Reader& r, CoefficientSpec& c, const std::string& base_dir) {
  r.allow({"kind", "lambda", "Lambda", "seed", "path"});
  r.get("kind", c.kind);
  r.check("kind", c.kind == "identity" || c.kind == "random" || c.kind == "file",
          [] { return "expected identity, random or file"; });
  r.get("lambda", c.lambda);
  r.get("Lambda", c.Lambda);
  r.get("seed", c.seed);
  r.get("path", c.path);
  if (c.kind == "random")
    r.check("lambda", c.lambda > 0.0 && c.lambda <= c.Lambda, [] { return "need 0 < lambda <= Lambda"; });
  if (c.kind == "file") {
    r.check("path", !c.path.empty(), [] { return "file coefficients need a path"; });
    if (std::filesystem::path(c.path).is_relative() && !base_dir.empty())
      c.path = (std::filesystem::path(base_dir) / c.path).string();
  }
}

void read_times(const Reader& r, TimeSpec& t) {
  r.allow({"count", "window", "t_min", "t_max"});
  r.get("count", t.count);
  r.check("count", t.count >= 16, [] { return "time grids need at least 16 samples"; });
  r.get("window", t.window);
  r.check("window", t.window == "standard" || t.window == "resolving" || t.window == "explicit",
          [] { return "expected standard, resolving or explicit"; });
  r.get("t_min", t.t_min);
  r.get("t_max", t.t_max);
  if (t.window == "explicit")
    r.check("t_max", t.t_min > 0.0 && t.t_max > t.t_min, [] { return "explicit window needs 0 < t_min < t_max"; });
}

void read_parameters(const Reader& r, ParameterSpec& p) {
  r.allow({"M", "p", "eps", "gamma", "aperture", "beta", "quad_nodes", "p_list"});
  r.get("M", p.M);
  r.check("M", p.M >= 1, [] { return "M must be at least 1"; });
  r.get("p", p.p);
  r.check("p", p.p >= 1.0, [] { return "p must be at least 1"; });
  r.get("eps", p.eps);
  r.check("eps", p.eps > 0.0, [] { return "eps must be positive"; });
  r.get("gamma", p.gamma);
  r.check("gamma", p.gamma > 0.0 && p.gamma < 1.0, [] { return "gamma must lie in (0, 1)"; });
  r.get("aperture", p.aperture);
  r.check("aperture", p.aperture > 0.0, [] { return "aperture must be positive"; });
  r.get("beta", p.beta);
  r.check("beta", p.beta > 0.0, [] { return "beta must be positive"; });
  r.get("quad_nodes", p.quad_nodes);
  r.check("quad_nodes", p.quad_nodes >= 32, [] { return "quad_nodes must be at least 32"; });
  r.get("p_list", p.p_list);
  r.check("p_list", !p.p_list.empty() && std::all_of(p.p_list.begin(), p.p_list.end(), [](double q) { return q >= 1.0; }),
          [] { return "p_list needs exponents >= 1"; });
}

void read_corpus(const Reader& r, CorpusSpec& c) {
  r.allow({"count", "seed", "generator"});
  r.get("count", c.count);
  r.check("count", c.count >= 0, [] { return "count must be nonnegative"; });
  r.get("seed", c.seed);
  std::string gen = to_string(c.generator);
  r.get("generator", gen);
  try {
    c.generator = corpus_kind_from_string(gen);
  } catch (const InvalidArgument& e) {
    r.locator().fail(r.at("generator"), e.what());
  }
}

void read_tolerances(const Reader& r, Tolerances& t) {
  r.allow({"spread", "riesz_spread", "slope_slack", "reconstruction", "duality", "homogeneity"});
  r.get("spread", t.spread);
  r.get("riesz_spread", t.riesz_spread);
  r.get("slope_slack", t.slope_slack);
  r.get("reconstruction", t.reconstruction);
  r.get("duality", t.duality);
  r.get("homogeneity", t.homogeneity);
  for (const char* k : {"spread", "riesz_spread", "reconstruction", "duality", "homogeneity"}) {
    double v = 1.0;
    r.get(k, v);
    r.check(k, v > 0.0, [] { return "tolerances must be positive"; });
  }
}

ExperimentConfig parse_with_base(const std::string& text, const std::string& source, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}:{}: malformed JSON: {}", source, line_at(text, e.byte), e.what()));
  }
  const Locator loc(text, source);
  const Reader r(j, loc, {});
  r.allow({"grid", "coefficients", "times", "parameters", "corpus", "output", "tolerances", "filter"});
  ExperimentConfig c;
  if (r.has("grid")) read_grid(r.child("grid"), c.grid);
  if (r.has("coefficients")) read_coefficients(r.child("coefficients"), c.coefficients, base_dir);
  if (r.has("times")) read_times(r.child("times"), c.times);
  if (r.has("parameters")) read_parameters(r.child("parameters"), c.parameters);
  if (r.has("corpus")) read_corpus(r.child("corpus"), c.corpus);
  if (r.has("tolerances")) read_tolerances(r.child("tolerances"), c.tolerances);
  r.get("output", c.output);
  if (r.has("filter")) {
    if (j.at("filter").is_string()) {
      c.filter = parse_filter(j.at("filter").get<std::string>());
    } else {
      r.get("filter", c.filter);
    }
  }
  return c;
}

}  // namespace

Grid GridSpec::make() const {
  const double h = spacing > 0.0 ? spacing : 1.0 / sizes[0];
  return Grid(sizes, h, boundary);
}

CoefficientField CoefficientSpec::make(const Grid& g) const {
  if (kind == "identity") return CoefficientField::identity(g);
  if (kind == "random") return random_elliptic_coefficients(g, lambda, Lambda, seed);
  CoefficientField a;
  try {
    a = coefficients_from_json(read_json_file(path));
  } catch (const InvalidArgument& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
  if (!(a.grid() == g)) throw ConfigError(fmt::format("{}: coefficient grid does not match the configured grid", path));
  return a;
}

TimeGrid TimeSpec::make(const Grid& g) const {
  if (window == "resolving") return TimeGrid::resolving(g, count);
  if (window == "explicit") return TimeGrid(t_min, t_max, count);
  return TimeGrid::standard(g, count);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  return parse_with_base(text, source, "");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_with_base(ss.str(), path, std::filesystem::path(path).parent_path().string());
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["grid"] = {{"sizes", c.grid.sizes}, {"spacing", c.grid.spacing}, {"boundary", to_string(c.grid.boundary)}};
  j["coefficients"] = {{"kind", c.coefficients.kind},
                       {"lambda", c.coefficients.lambda},
                       {"Lambda", c.coefficients.Lambda},
                       {"seed", c.coefficients.seed},
                       {"path", c.coefficients.path}};
  j["times"] = {{"count", c.times.count}, {"window", c.times.window}, {"t_min", c.times.t_min}, {"t_max", c.times.t_max}};
  const auto& p = c.parameters;
  j["parameters"] = {{"M", p.M},         {"p", p.p},       {"eps", p.eps},
                     {"gamma", p.gamma}, {"aperture", p.aperture}, {"beta", p.beta},
                     {"quad_nodes", p.quad_nodes}, {"p_list", p.p_list}};
  j["corpus"] = {{"count", c.corpus.count}, {"seed", c.corpus.seed}, {"generator", to_string(c.corpus.generator)}};
  j["output"] = c.output;
  const auto& t = c.tolerances;
  j["tolerances"] = {{"spread", t.spread},         {"riesz_spread", t.riesz_spread}, {"slope_slack", t.slope_slack},
                     {"reconstruction", t.reconstruction}, {"duality", t.duality}, {"homogeneity", t.homogeneity}};
  j["filter"] = c.filter;
  return j;
}

GridSpec parse_grid_override(const std::string& s) {
  GridSpec g;
  g.sizes.clear();
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(part, &used);
      if (used != part.size() || n < 2) throw std::invalid_argument(part);
      g.sizes.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("--grid: cannot read '{}' (expected N or NxM)", s));
    }
  }
  if (g.sizes.empty() || g.sizes.size() > 2) throw ConfigError(fmt::format("--grid: expected N or NxM, got '{}'", s));
  return g;
}

std::vector<std::string> parse_filter(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ','))
    if (!part.empty()) out.push_back(part);
  return out;
}

}  // namespace hardy
