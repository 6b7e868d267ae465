#include "hardy/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hardy/error.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundSlack = 1e-10;

std::vector<char> membership(const Grid& g, const std::vector<Index>& set) {
  std::vector<char> in(g.node_count(), 0);
  for (Index x : set) {
    if (x < 0 || x >= g.node_count()) throw InvalidArgument("node index outside the grid");
    in[x] = 1;
  }
  return in;
}

void check_params(const MoleculeParams& p) {
  if (p.M < 1) throw InvalidArgument("molecule order M must be at least 1");
  if (!(p.p >= 1.0)) throw InvalidArgument("molecule exponent p must be at least 1");
  if (!(p.eps > 0.0)) throw InvalidArgument("molecule decay eps must be positive");
}

// Dyadic block sides available on this grid: powers of two up to the smallest side.
int top_block(const Grid& g) {
  int n = g.size(0);
  if (g.dim() == 2) n = std::min(n, g.size(1));
  int c = 1;
  while (2 * c <= n) c *= 2;
  return c;
}

}  // namespace

double calderon_constant(int M) {
  if (M < 1) throw InvalidArgument("calderon_constant needs M >= 1");
  const double a = M + 2;
  return 2.0 * std::pow(a, a) / std::tgamma(a);
}

Eigen::VectorXd distance_to_complement(const Grid& g, const std::vector<Index>& set) {
  const auto in = membership(g, set);
  std::vector<Index> outside;
  for (Index x = 0; x < g.node_count(); ++x)
    if (!in[x]) outside.push_back(x);
  Eigen::VectorXd d = Eigen::VectorXd::Constant(g.node_count(), kInf);
  for (Index x = 0; x < g.node_count(); ++x) {
    if (!in[x]) {
      d[x] = 0.0;
      continue;
    }
    double best = kInf;
    for (Index z : outside) best = std::min(best, g.distance2(x, z));
    d[x] = std::sqrt(best);
  }
  return d;
}

DensityExpansion density_expansion(const Grid& g, const std::vector<Index>& set, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("density parameter gamma must lie in (0, 1)");
  DensityExpansion out;
  if (set.empty()) return out;
  const Eigen::VectorXd m = real_values(hl_maximal(ScalarField::indicator(g, set)));
  for (Index x = 0; x < g.node_count(); ++x)
    if (m[x] > 1.0 - gamma) out.nodes.push_back(x);
  out.growth = static_cast<double>(out.nodes.size()) / static_cast<double>(set.size());
  return out;
}

double cube_distance(const Cube& q, const Eigen::VectorXd& dist_map) {
  double d = kInf;
  for (Index x : q.nodes()) d = std::min(d, dist_map[x]);
  return d;
}

WhitneySet whitney_decompose(const std::vector<Index>& open_set, const Grid& grid) {
  WhitneySet w;
  w.parent_open_set = open_set;
  std::sort(w.parent_open_set.begin(), w.parent_open_set.end());
  w.parent_open_set.erase(std::unique(w.parent_open_set.begin(), w.parent_open_set.end()), w.parent_open_set.end());
  if (w.parent_open_set.empty()) return w;
  w.whole_grid = static_cast<Index>(w.parent_open_set.size()) == grid.node_count();

  const auto in = membership(grid, w.parent_open_set);
  const Eigen::VectorXd dist = distance_to_complement(grid, w.parent_open_set);
  std::vector<char> covered(grid.node_count(), 0);
  const int ny = grid.dim() == 2 ? grid.size(1) : 1;

  for (int c = top_block(grid); c >= 1; c /= 2) {
    const int cy = grid.dim() == 2 ? c : 1;
    for (int y0 = 0; y0 + cy <= ny; y0 += cy)
      for (int x0 = 0; x0 + c <= grid.size(0); x0 += c) {
        const Cube q(grid, {x0, y0}, c);
        const auto nodes = q.nodes();
        bool ok = true;
        double d = kInf;
        for (Index x : nodes) {
          if (covered[x] || !in[x]) {
            ok = false;
            break;
          }
          d = std::min(d, dist[x]);
        }
        if (!ok || !(q.sidelength() <= whitney_c2 * d * (1.0 + 1e-12))) continue;
        for (Index x : nodes) covered[x] = 1;
        w.cubes.push_back(q);
      }
  }
  return w;
}

TentRegion::TentRegion(const Grid& g, const std::vector<Index>& base) : dist_(distance_to_complement(g, base)) {}

std::vector<Index> TruncatedTent::slice(double t) const {
  std::vector<Index> out;
  for (Index x : cube.nodes())
    if (upper.contains(x, t) && !lower.contains(x, t)) out.push_back(x);
  return out;
}

TruncatedTent build_truncated_tents(const Grid& g, const std::vector<Index>& level_k, const std::vector<Index>& level_k1,
                                    const Cube& q) {
  return {q, TentRegion(g, level_k), TentRegion(g, level_k1)};
}

std::string to_string(MoleculeKind k) { return k == MoleculeKind::heat ? "heat" : "resolvent"; }

MoleculeKind molecule_kind_from_string(const std::string& s) {
  if (s == "heat") return MoleculeKind::heat;
  if (s == "resolvent") return MoleculeKind::resolvent;
  throw InvalidArgument("unknown molecule kind: " + s);
}

namespace {

// (l^2 L)^{-k} m for k = 0..max_power.
std::vector<CVector> negative_powers(const Semigroup& sg, const CVector& m, double side, int max_power) {
  std::vector<CVector> out{m};
  for (int k = 1; k <= max_power; ++k) out.push_back(sg.neg_power(1, out.back()) / (side * side));
  return out;
}

std::vector<std::vector<Index>> annuli(const Cube& q) {
  std::vector<std::vector<Index>> out;
  const int top = q.covering_level();
  for (int i = 0; i <= top; ++i) out.push_back(q.annulus(i));
  return out;
}

double annulus_exponent(const Grid& g, const MoleculeParams& p) {
  const double n = g.dim();
  return n - n / p.p + p.eps;
}

}  // namespace

MoleculeReport molecule_report(const Semigroup& sg, const ScalarField& m, const Cube& q, const MoleculeParams& params,
                               int max_power) {
  require_same_grid(sg.grid(), m.grid, "molecule_report");
  if (!(params.p >= 1.0) || !(params.eps > 0.0)) throw InvalidArgument("molecule_report needs p >= 1 and eps > 0");
  if (max_power < 0) throw InvalidArgument("max_power must be nonnegative");
  const Grid& g = m.grid;
  const auto powers = negative_powers(sg, m.values, q.sidelength(), max_power);
  const auto rings = annuli(q);
  const double base = std::pow(q.volume(), 1.0 / params.p - 1.0);
  const double expo = annulus_exponent(g, params);

  MoleculeReport r;
  for (int k = 0; k <= max_power; ++k)
    for (std::size_t i = 0; i < rings.size(); ++i) {
      if (rings[i].empty()) continue;
      const double bound = std::exp2(-static_cast<double>(i) * expo) * base;
      const double measured = lp_norm_on(powers[k], g, rings[i], params.p);
      const bool pass = measured <= bound * (1.0 + kBoundSlack);
      r.rows.push_back({static_cast<int>(i), k, measured, bound, pass});
      r.pass = r.pass && pass;
      r.worst_ratio = std::max(r.worst_ratio, measured / bound);
    }
  return r;
}

MoleculeReport validate_molecule(const Semigroup& sg, const Molecule& m) {
  check_params(m.params);
  return molecule_report(sg, m.field, m.cube, m.params, m.params.M);
}

Molecule make_molecule(const Semigroup& sg, const ScalarField& f_on_q, const Cube& q, MoleculeKind kind,
                       const MoleculeParams& params) {
  require_same_grid(sg.grid(), f_on_q.grid, "make_molecule");
  require_same_grid(q.grid(), f_on_q.grid, "make_molecule");
  check_params(params);
  const Grid& g = f_on_q.grid;
  for (Index x = 0; x < g.node_count(); ++x)
    if (f_on_q.values[x] != Complex(0.0) && !q.contains(x))
      throw InvalidArgument("make_molecule: input is not supported in the cube");
  if (lp_norm(f_on_q.values, g, 2.0) > std::pow(q.volume(), -0.5) * (1.0 + 1e-12))
    throw InvalidArgument("make_molecule: input exceeds the L2 normalization |Q|^{-1/2}");

  const double s = q.sidelength() * q.sidelength();
  CVector m;
  if (kind == MoleculeKind::heat) {
    m = sg.heat_power_family({s}, params.M, f_on_q.values)[0];
  } else {
    m = f_on_q.values;
    for (int r = 0; r < params.M; ++r) m -= sg.resolvent(s, m);
  }

  Molecule out{ScalarField(g, m), q, params, 1.0, {}};
  const MoleculeReport raw = molecule_report(sg, out.field, q, params, params.M);
  if (raw.worst_ratio > 0.0) {
    out.normalization = raw.worst_ratio;
    out.field.values /= raw.worst_ratio;
  }
  out.report = validate_molecule(sg, out);
  return out;
}

double molecular_norm(const Semigroup& sg, const ScalarField& mu, const Cube& q, const MoleculeParams& params) {
  require_same_grid(sg.grid(), mu.grid, "molecular_norm");
  check_params(params);
  const Grid& g = mu.grid;
  const auto powers = negative_powers(sg, mu.values, q.sidelength(), params.M);
  const auto rings = annuli(q);
  const double scale = std::pow(q.volume(), 1.0 - 1.0 / params.p);
  const double expo = annulus_exponent(g, params);
  double best = 0.0;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    if (rings[i].empty()) continue;
    double sum = 0.0;
    for (const auto& u : powers) sum += lp_norm_on(u, g, rings[i], params.p);
    best = std::max(best, std::exp2(static_cast<double>(i) * expo) * scale * sum);
  }
  return best;
}

MolecularDecomposition molecular_decompose(const Semigroup& sg, const ScalarField& f, const TimeGrid& times,
                                           const DecompositionOptions& options) {
  require_same_grid(sg.grid(), f.grid, "molecular_decompose");
  check_params(options.molecule);
  if (!(options.gamma > 0.0 && options.gamma < 1.0)) throw InvalidArgument("gamma must lie in (0, 1)");
  const Grid& g = f.grid;
  const int M = options.molecule.M;

  MolecularDecomposition d;
  d.grid = g;
  d.options = options;
  d.times = times;
  d.calderon = calderon_constant(M);
  d.square = ScalarField(g);
  d.residual = ScalarField(g);
  if (f.values.cwiseAbs().maxCoeff() == 0.0) return d;

  const ScalarField f0(g, sg.require_range(f.values));
  const SpaceTimeField F = square_integrand(sg, f0, SquareKind::heat, 1, times);
  d.square = cone_integrate(F, ConeSpec{});
  const Eigen::VectorXd S = real_values(d.square);
  const double smax = S.maxCoeff();
  if (!(smax > 0.0)) throw InvalidArgument("degenerate input: S_h f vanishes although f does not");
  double smin = kInf;
  for (Index x = 0; x < S.size(); ++x)
    if (S[x] > 0.0) smin = std::min(smin, S[x]);

  int kmin = static_cast<int>(std::floor(std::log2(smin)));
  if (std::ldexp(1.0, kmin) >= smin) --kmin;  // every positive node lies in O_kmin
  const int kmax = static_cast<int>(std::ceil(std::log2(smax)));
  for (int k = kmin; k <= kmax; ++k) {
    DecompositionLevel lv;
    lv.k = k;
    const double level = std::ldexp(1.0, k);
    for (Index x = 0; x < S.size(); ++x)
      if (S[x] > level) lv.set.push_back(x);
    if (lv.set.empty()) break;
    lv.expanded = density_expansion(g, lv.set, options.gamma);
    lv.whitney = whitney_decompose(lv.expanded.nodes, g);
    d.levels.push_back(std::move(lv));
  }

  std::vector<TentRegion> tents;
  for (const auto& lv : d.levels) tents.emplace_back(g, lv.expanded.nodes);
  tents.emplace_back(g, std::vector<Index>{});

  struct Pending {
    int level;
    int index;
    TruncatedTent tent;
  };
  std::vector<Pending> pending;
  for (std::size_t l = 0; l < d.levels.size(); ++l)
    for (std::size_t j = 0; j < d.levels[l].whitney.cubes.size(); ++j) {
      TruncatedTent tent{d.levels[l].whitney.cubes[j], tents[l], tents[l + 1]};
      bool empty = true;
      for (double t : times.samples())
        if (!tent.slice(t).empty()) {
          empty = false;
          break;
        }
      // An empty tent gives m = 0, which carries no mass and is not a term.
      if (!empty) pending.push_back({static_cast<int>(l), static_cast<int>(j), std::move(tent)});
    }

  const int K = M + 1;
  const double power_scale = 1.0 / std::pow(static_cast<double>(K), K);
  d.terms.resize(pending.size());
  parallel_for(static_cast<std::ptrdiff_t>(pending.size()), [&](std::ptrdiff_t i) {
    const Pending& p = pending[i];
    const int k = d.levels[p.level].k;
    const double weight = d.calderon * std::ldexp(1.0, k) * p.tent.cube.volume();
    CVector acc = CVector::Zero(g.node_count());
    for (int j = 0; j < times.count(); ++j) {
      const auto nodes = p.tent.slice(times[j]);
      if (nodes.empty()) continue;
      CVector piece = CVector::Zero(g.node_count());
      for (Index x : nodes) piece[x] = F.components[0](x, j);
      const double t2 = times[j] * times[j];
      acc += (times.weights()[j] * power_scale) * sg.heat_power_family({K * t2}, K, piece)[0];
    }
    acc *= d.calderon / weight;
    d.terms[i] = {k, p.index, weight, p.tent.cube, ScalarField(g, acc), 0.0, false};
  });

  CVector recon = CVector::Zero(g.node_count());
  for (const auto& t : d.terms) {
    recon += t.weight * t.molecule.values;
    d.weight_sum += std::abs(t.weight);
  }
  d.residual = ScalarField(g, f.values - recon);
  d.residual_norm = lp_norm(d.residual.values, g, 2.0);
  d.relative_residual = d.residual_norm / lp_norm(f.values, g, 2.0);

  parallel_for(static_cast<std::ptrdiff_t>(d.terms.size()), [&](std::ptrdiff_t i) {
    auto& t = d.terms[i];
    t.required_normalization = molecule_report(sg, t.molecule, t.cube, options.molecule, M).worst_ratio;
  });
  for (const auto& t : d.terms) d.normalization = std::max(d.normalization, t.required_normalization);
  parallel_for(static_cast<std::ptrdiff_t>(d.terms.size()), [&](std::ptrdiff_t i) {
    auto& t = d.terms[i];
    const ScalarField scaled(g, t.molecule.values / d.normalization);
    t.valid = molecule_report(sg, scaled, t.cube, options.molecule, M).pass;
  });
  for (const auto& t : d.terms) d.all_valid = d.all_valid && t.valid;
  return d;
}

H1Estimate h1_norm_estimate(const MolecularDecomposition& d, const ScalarField& f) {
  H1Estimate e;
  e.weight_sum = d.weight_sum;
  e.f_l1 = lp_norm(f.values, f.grid, 1.0);
  e.estimate = e.weight_sum + e.f_l1;
  e.square_l1 = lp_norm(d.square.values, d.grid, 1.0);
  return e;
}

H1Estimate h1_norm_estimate(const Semigroup& sg, const ScalarField& f, const TimeGrid& times,
                            const DecompositionOptions& options) {
  return h1_norm_estimate(molecular_decompose(sg, f, times, options), f);
}

Json to_json(const MolecularDecomposition& d) {
  Json levels = Json::array();
  for (const auto& lv : d.levels)
    levels.push_back({{"k", lv.k},
                      {"set_size", lv.set.size()},
                      {"expanded_size", lv.expanded.nodes.size()},
                      {"growth", lv.expanded.growth},
                      {"cubes", lv.whitney.cubes.size()}});
  Json terms = Json::array();
  Json molecules = Json::array();
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    const auto& t = d.terms[i];
    terms.push_back({{"k", t.level},
                     {"j", t.index},
                     {"lambda", t.weight},
                     {"cube", to_json(t.cube)},
                     {"molecule", i},
                     {"required_normalization", t.required_normalization},
                     {"valid", t.valid}});
    molecules.push_back(to_json(t.molecule)["values"]);
  }
  return {{"metadata",
           {{"M", d.options.molecule.M},
            {"p", d.options.molecule.p},
            {"eps", d.options.molecule.eps},
            {"gamma", d.options.gamma},
            {"C_M", d.calderon},
            {"truncation", {d.times.t_min(), d.times.t_max()}},
            {"time_samples", d.times.count()}}},
          {"grid", to_json(d.grid)},
          {"weight_sum", d.weight_sum},
          {"residual_norm", d.residual_norm},
          {"relative_residual", d.relative_residual},
          {"normalization", d.normalization},
          {"all_valid", d.all_valid},
          {"levels", levels},
          {"terms", terms},
          {"molecules", molecules}};
}

std::string summary_csv(const MolecularDecomposition& d) {
  std::ostringstream os;
  os << "k,j,lambda,sidelength,required_normalization,valid\n";
  for (const auto& t : d.terms)
    os << t.level << ',' << t.index << ',' << format_number(t.weight) << ',' << format_number(t.cube.sidelength())
       << ',' << format_number(t.required_normalization) << ',' << (t.valid ? 1 : 0) << '\n';
  return os.str();
}

}  // namespace hardy
