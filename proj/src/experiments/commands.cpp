#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hardy/error.hpp"
#include "hardy/experiments.hpp"
#include "hardy/oracle_suite.hpp"

namespace hardy {

namespace {

namespace fs = std::filesystem;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// What a command produced: files written and named assertions.
struct Run {
  const ExperimentConfig& config;
  std::ostream& log;
  std::vector<std::string> files;
  std::vector<std::pair<std::string, bool>> assertions;

  void write(const std::string& name, const std::string& body) {
    write_text((fs::path(config.output) / name).string(), body);
    files.push_back(name);
  }
  void write(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  void check(const std::string& what, bool ok) {
    assertions.emplace_back(what, ok);
    log << (ok ? "ok    " : "FAIL  ") << what << '\n';
  }
};

Json spread_json(const RatioSpread& s) {
  if (s.degenerate()) return {{"degenerate", true}};
  return {{"min", s.min}, {"max", s.max}, {"spread", s.spread}, {"used", s.used}};
}

bool spread_ok(const RatioSpread& s, double limit) { return s.degenerate() || s.spread <= limit; }

// ---- commands ----

void cmd_assemble(Run& run) {
  const Context ctx(run.config);
  const auto& op = ctx.sg.op();
  run.write("operator.json", to_json(op));
  run.write("coefficients.json", to_json(ctx.coefficients));
  const auto b = op.spectral_bounds();
  run.write("assemble.json", Json{{"nodes", ctx.grid.node_count()},
                                  {"nonzeros", op.matrix().nonZeros()},
                                  {"lambda", op.lambda()},
                                  {"Lambda", op.Lambda()},
                                  {"hermitian", op.hermitian()},
                                  {"spectral_low", b.low},
                                  {"spectral_high", b.high}});
}

void cmd_functional(Run& run) {
  const Context ctx(run.config);
  const auto& prm = ctx.config.parameters;
  const auto corpus = ctx.corpus();
  const Grid& g = ctx.grid;
  std::ostringstream norms, fields;
  norms << "field,f_l1,S_h,N_h,S_P,N_P,g_h\n";
  fields << "field,node,x0" << (g.dim() == 2 ? ",x1" : "") << ",f,S_h,N_h,S_P,N_P,g_h\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& f = corpus[i];
    const ConeSpec cone{prm.aperture};
    const Eigen::VectorXd v[5] = {
        real_values(square_function(ctx.sg, f, cone, SquareKind::heat, 1, ctx.times)),
        real_values(nontangential_max(ctx.sg, f, MaximalKind::heat, prm.beta, 1, ctx.times)),
        real_values(square_function(ctx.sg, f, cone, SquareKind::poisson_full_grad, 1, ctx.times)),
        real_values(nontangential_max(ctx.sg, f, MaximalKind::poisson, prm.beta, 1, ctx.times)),
        real_values(vertical_square_function(ctx.sg, f, VerticalKind::g_h, 1, ctx.times))};
    norms << i << ',' << format_number(lp_norm(f.values, g, 1.0));
    for (const auto& u : v) norms << ',' << format_number(lp_norm(u, g, 1.0));
    norms << '\n';
    for (Index x = 0; x < g.node_count(); ++x) {
      fields << i << ',' << x;
      for (int a = 0; a < g.dim(); ++a) fields << ',' << format_number(g.position(x, a));
      fields << ',' << format_number(f.values[x].real());
      for (const auto& u : v) fields << ',' << format_number(u[x]);
      fields << '\n';
    }
  }
  run.write("functional_norms.csv", norms.str());
  run.write("functional_fields.csv", fields.str());
}

void cmd_decompose(Run& run) {
  const Context ctx(run.config);
  const auto corpus = ctx.corpus();
  const DecompositionOptions opt{ctx.molecule_params(), ctx.config.parameters.gamma};
  std::ostringstream os;
  os << "field,terms,weight_sum,relative_residual,normalization,all_valid\n";
  double worst = 0.0;
  bool valid = true;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto d = molecular_decompose(ctx.sg, corpus[i], ctx.resolving, opt);
    run.write(fmt::format("decomposition_{}.json", i), to_json(d));
    run.write(fmt::format("decomposition_{}.csv", i), summary_csv(d));
    os << i << ',' << d.terms.size() << ',' << format_number(d.weight_sum) << ',' << format_number(d.relative_residual)
       << ',' << format_number(d.normalization) << ',' << (d.all_valid ? 1 : 0) << '\n';
    worst = std::max(worst, d.relative_residual);
    valid = valid && d.all_valid;
  }
  run.write("decompose.csv", os.str());
  run.check(fmt::format("reconstruction error {} <= {}", format_number(worst), format_number(ctx.config.tolerances.reconstruction)),
            worst <= ctx.config.tolerances.reconstruction);
  run.check("every molecule validates after global normalization", valid);
}

void cmd_validate(Run& run) {
  const Context ctx(run.config);
  const auto corpus = ctx.corpus();
  const DecompositionOptions opt{ctx.molecule_params(), ctx.config.parameters.gamma};
  std::ostringstream os;
  os << "field,k,j,sidelength,raw_ratio,normalized_ratio,pass\n";
  int failures = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto d = molecular_decompose(ctx.sg, corpus[i], ctx.resolving, opt);
    for (const auto& t : d.terms) {
      const Molecule m{ScalarField(ctx.grid, t.molecule.values / d.normalization), t.cube, opt.molecule, d.normalization, {}};
      const auto rep = validate_molecule(ctx.sg, m);
      failures += rep.pass ? 0 : 1;
      os << i << ',' << t.level << ',' << t.index << ',' << format_number(t.cube.sidelength()) << ','
         << format_number(t.required_normalization) << ',' << format_number(rep.worst_ratio) << ',' << (rep.pass ? 1 : 0)
         << '\n';
    }
  }
  run.write("validate.csv", os.str());
  run.check(fmt::format("{} molecules fail validation", failures), failures == 0);
}

void cmd_bmo(Run& run) {
  const Context ctx(run.config);
  const auto corpus = ctx.corpus();
  const auto e = bmo_experiment(ctx, corpus);
  const double lim = ctx.config.tolerances.spread;
  run.write("bmo.csv", bmo_csv(ctx, e));
  Json s;
  s["M"] = ctx.config.parameters.M;
  s["heat_over_resolvent"] = spread_json(e.heat_resolvent);
  Json jn = Json::object();
  for (std::size_t k = 0; k < e.p_vs_2.size(); ++k)
    jn[format_number(ctx.config.parameters.p_list[k])] = spread_json(e.p_vs_2[k]);
  s["p_over_2"] = jn;
  s["john_nirenberg_joint"] = spread_json(e.john_nirenberg);
  s["carleson_over_bmo2"] = spread_json(e.carleson_bmo2);
  s["molecule_pairing_over_bmo"] = e.molecule_pairing;
  s["duality_error"] = e.duality_error;
  run.write("bmo_summary.json", s);
  run.check("heat/resolvent spread", spread_ok(e.heat_resolvent, lim));
  for (std::size_t k = 0; k < e.p_vs_2.size(); ++k)
    run.check(fmt::format("BMO^p spread, p = {}", format_number(ctx.config.parameters.p_list[k])), spread_ok(e.p_vs_2[k], lim));
  run.check("carleson/bmo^2 spread", spread_ok(e.carleson_bmo2, lim));
  run.check(fmt::format("duality error {}", format_number(e.duality_error)), e.duality_error <= ctx.config.tolerances.duality);
}

void cmd_carleson(Run& run) {
  const Context ctx(run.config);
  const auto corpus = ctx.corpus();
  std::ostringstream os;
  os << "field,carleson_norm,argmax_centre,argmax_radius\n";
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto r = carleson_functional(ctx.sg, corpus[i], ctx.config.parameters.M, ctx.times);
    run.write(fmt::format("carleson_{}.csv", i), to_csv(r, ctx.grid));
    const Ball b = r.per_ball.empty() ? Ball{0, 0.0} : r.per_ball[r.argmax].ball;
    os << i << ',' << format_number(r.carleson_norm) << ',' << b.centre << ',' << format_number(b.radius) << '\n';
  }
  run.write("carleson.csv", os.str());
}

void cmd_riesz(Run& run) {
  const Context ctx(run.config);
  const auto e = riesz_experiment(ctx);
  run.write("riesz.csv", to_csv(e.report));
  run.write("commutator.csv", commutator_csv(e));
  Json s;
  s["sup"] = e.report.sup;
  s["min"] = e.report.min;
  s["spread"] = e.report.spread;
  Json slopes = Json::array();
  for (const auto& c : e.commutators)
    slopes.push_back({{"target", to_string(c.target)},
                      {"M", c.M},
                      {"difference_slope", c.sweep.difference_slope},
                      {"power_slope", c.sweep.power_slope}});
  s["commutator_slopes"] = slopes;
  run.write("riesz_summary.json", s);
  const auto& tol = ctx.config.tolerances;
  run.check(fmt::format("Riesz L1 spread {} <= {}", format_number(e.report.spread), format_number(tol.riesz_spread)),
            e.report.spread <= tol.riesz_spread);
  run.check(fmt::format("commutator slopes >= M - {}", format_number(tol.slope_slack)),
            e.worst_slope_margin >= -tol.slope_slack);
}

void cmd_equivalence(Run& run) {
  const Context ctx(run.config);
  const auto corpus = ctx.corpus();
  if (corpus.empty()) throw ConfigError("empty corpus");
  const auto r = equivalence_experiment(ctx, corpus);
  run.write("equivalence.csv", equivalence_values_csv(r));
  run.write("equivalence_pairs.csv", equivalence_pairs_csv(r));
  run.write("equivalence_summary.json", Json{{"worst_spread", r.worst_spread}, {"fields", r.rows.size()}});
  run.check(fmt::format("worst pairwise spread {} <= {}", format_number(r.worst_spread),
                        format_number(ctx.config.tolerances.spread)),
            r.worst_spread <= ctx.config.tolerances.spread);
}

void cmd_oracle(Run& run) {
  const Grid g = run.config.grid.make();
  const auto a = run.config.coefficients.make(g);
  const auto suites = run.config.filter.empty() ? oracle_suite_names() : run.config.filter;
  const auto r = run_oracle_suite(g, a, suites, fmt::format("{}", fmt::join(run.config.grid.sizes, "x")));
  run.write("oracle.json", to_json(r));
  for (const auto& c : r.checks)
    if (!c.pass) run.log << "  " << c.suite << '/' << c.name << ": " << c.measured << " > " << c.tolerance << '\n';
  run.check(fmt::format("{} oracle comparisons, {} failures", r.checks.size(), r.failures()), r.pass());
}

Json csv_to_json(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  Json rows = Json::array();
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (header.empty()) {
      header = cells;
      continue;
    }
    Json row = Json::array();
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (!c.empty() && end == c.c_str() + c.size())
        row.push_back(v);
      else
        row.push_back(c);
    }
    rows.push_back(row);
  }
  return {{"columns", header}, {"rows", rows}};
}

void cmd_report(Run& run) {
  const fs::path dir(run.config.output);
  if (!fs::is_directory(dir)) throw ConfigError(fmt::format("output directory {} does not exist", dir.string()));
  std::vector<fs::path> csvs, summaries;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto p = entry.path();
    if (p.extension() == ".csv") csvs.push_back(p);
    if (p.filename().string().ends_with("_summary.json") || p.filename() == "oracle.json") summaries.push_back(p);
  }
  std::sort(csvs.begin(), csvs.end());
  std::sort(summaries.begin(), summaries.end());
  Json out;
  out["tables"] = Json::object();
  for (const auto& p : csvs) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    out["tables"][p.filename().string()] = csv_to_json(ss.str());
  }
  out["summaries"] = Json::object();
  for (const auto& p : summaries) out["summaries"][p.filename().string()] = read_json_file(p.string());
  run.write("report.json", out);
}

const std::map<std::string, std::function<void(Run&)>>& table() {
  static const std::map<std::string, std::function<void(Run&)>> t{
      {"assemble", cmd_assemble}, {"functional", cmd_functional}, {"decompose", cmd_decompose},
      {"validate", cmd_validate}, {"bmo", cmd_bmo},               {"carleson", cmd_carleson},
      {"riesz", cmd_riesz},       {"equivalence", cmd_equivalence}, {"oracle", cmd_oracle},
      {"report", cmd_report}};
  return t;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"assemble", "functional", "decompose", "validate", "bmo", "carleson", "riesz", "equivalence", "oracle", "report"};
}

int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log) {
  const auto it = table().find(command);
  if (it == table().end()) {
    log << "error: unknown command '" << command << "'\n";
    return exit_config;
  }
  Run run{config, log, {}, {}};
  const std::string started = timestamp();
  int code = exit_ok;
  std::string error;
  try {
    it->second(run);
    for (const auto& [what, ok] : run.assertions)
      if (!ok) code = exit_assertion;
  } catch (const ConfigError& e) {
    code = exit_config;
    error = e.what();
  } catch (const InvalidArgument& e) {
    code = exit_config;
    error = e.what();
  } catch (const NumericalError& e) {
    code = exit_numerical;
    error = e.what();
  } catch (const std::exception& e) {
    code = exit_numerical;
    error = e.what();
  }
  if (!error.empty()) log << "error: " << error << '\n';

  if (code != exit_config || !run.files.empty()) {
    Json meta;
    meta["command"] = command;
    meta["started"] = started;
    meta["finished"] = timestamp();
    meta["exit_code"] = code;
    if (!error.empty()) meta["error"] = error;
    meta["files"] = run.files;
    Json checks = Json::array();
    for (const auto& [what, ok] : run.assertions) checks.push_back({{"check", what}, {"pass", ok}});
    meta["assertions"] = checks;
    meta["config"] = to_json(config);
    try {
      write_text((fs::path(config.output) / (command + ".meta.json")).string(), meta.dump(2) + "\n");
    } catch (const ConfigError& e) {
      log << "error: " << e.what() << '\n';
      if (code == exit_ok) code = exit_config;
    }
  }
  return code;
}

}  // namespace hardy
