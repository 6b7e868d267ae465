#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hardy/error.hpp"
#include "hardy/experiments.hpp"
#include "hardy/gaffney.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

const char* const kProxyNames[kProxyCount] = {"decomposition", "S_h", "N_h", "S_P", "N_P"};

Context::Context(ExperimentConfig c) : config(std::move(c)) {
  grid = config.grid.make();
  coefficients = config.coefficients.make(grid);
  sg = Semigroup(assemble_operator(grid, coefficients));
  times = config.times.make(grid);
  resolving = TimeGrid::resolving(grid, config.times.count);
}

std::vector<ScalarField> Context::corpus() const {
  return make_corpus(sg, config.corpus.count, config.corpus.seed, config.corpus.generator);
}

MoleculeParams Context::molecule_params() const {
  return {config.parameters.p, config.parameters.eps, config.parameters.M};
}

// ---- equivalence ----

ProxyValues proxy_values(const Context& ctx, const ScalarField& f) {
  const auto& prm = ctx.config.parameters;
  ProxyValues v;
  v.f_l1 = lp_norm(f.values, f.grid, 1.0);
  const auto d = molecular_decompose(ctx.sg, f, ctx.resolving, {ctx.molecule_params(), prm.gamma});
  v.raw[0] = d.weight_sum;
  v.residual = d.relative_residual;
  v.normalization = d.normalization;
  v.molecules_valid = d.all_valid;
  const ConeSpec cone{prm.aperture};
  auto l1 = [&](const ScalarField& u) { return lp_norm(real_values(u), f.grid, 1.0); };
  v.raw[1] = l1(square_function(ctx.sg, f, cone, SquareKind::heat, 1, ctx.times));
  v.raw[2] = l1(nontangential_max(ctx.sg, f, MaximalKind::heat, prm.beta, 1, ctx.times));
  v.raw[3] = l1(square_function(ctx.sg, f, cone, SquareKind::poisson_full_grad, 1, ctx.times));
  v.raw[4] = l1(nontangential_max(ctx.sg, f, MaximalKind::poisson, prm.beta, 1, ctx.times));
  for (int i = 0; i < kProxyCount; ++i) v.value[i] = v.raw[i] + v.f_l1;
  return v;
}

EquivalenceReport equivalence_experiment(const Context& ctx, const std::vector<ScalarField>& corpus) {
  if (corpus.empty()) throw InvalidArgument("empty corpus");
  EquivalenceReport r;
  r.rows.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) r.rows[i] = proxy_values(ctx, corpus[i]);
  for (int a = 0; a < kProxyCount; ++a)
    for (int b = a + 1; b < kProxyCount; ++b) {
      std::vector<double> q;
      for (const auto& row : r.rows) q.push_back(row.value[a] / row.value[b]);
      std::sort(q.begin(), q.end());
      const std::size_t n = q.size();
      const double median = n % 2 ? q[n / 2] : 0.5 * (q[n / 2 - 1] + q[n / 2]);
      PairStat s{a, b, q.front(), q.back(), median, q.back() / q.front()};
      r.worst_spread = std::max(r.worst_spread, s.spread);
      r.pairs.push_back(s);
    }
  return r;
}

std::string equivalence_values_csv(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "field,f_l1";
  for (const char* name : kProxyNames) os << ',' << name;
  os << ",residual,normalization,molecules_valid\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& v = r.rows[i];
    os << i << ',' << format_number(v.f_l1);
    for (double x : v.raw) os << ',' << format_number(x);
    os << ',' << format_number(v.residual) << ',' << format_number(v.normalization) << ',' << (v.molecules_valid ? 1 : 0)
       << '\n';
  }
  return os.str();
}

std::string equivalence_pairs_csv(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "numerator,denominator,min,max,median,spread\n";
  for (const auto& p : r.pairs)
    os << kProxyNames[p.a] << ',' << kProxyNames[p.b] << ',' << format_number(p.min) << ',' << format_number(p.max) << ','
       << format_number(p.median) << ',' << format_number(p.spread) << '\n';
  return os.str();
}

// ---- BMO ----

RatioSpread ratio_spread(const std::vector<double>& num, const std::vector<double>& den) {
  RatioSpread s;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (num[i] == 0.0 && den[i] == 0.0) continue;
    const double q = den[i] == 0.0 ? std::numeric_limits<double>::infinity() : num[i] / den[i];
    lo = std::min(lo, q);
    hi = std::max(hi, q);
    ++s.used;
  }
  if (s.used == 0) return s;
  s.min = lo;
  s.max = hi;
  s.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  return s;
}

std::vector<Molecule> molecule_corpus(const Semigroup& sg, int count, std::uint64_t seed, const MoleculeParams& params) {
  const Grid& g = sg.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  int short_side = g.size(0);
  if (g.dim() == 2) short_side = std::min(short_side, g.size(1));
  int scales = 1;
  while ((2 << scales) * 4 <= short_side) ++scales;  // sides 2 .. short_side / 4
  std::vector<Molecule> out;
  for (int i = 0; i < count; ++i) {
    const int side = 2 << (i % scales);
    std::array<int, 2> corner{0, 0};
    for (int a = 0; a < g.dim(); ++a) {
      const int span = g.periodic() ? g.size(a) : g.size(a) - side + 1;
      corner[a] = static_cast<int>(rng() % static_cast<std::uint64_t>(span));
    }
    const Cube q(g, corner, side);
    const auto nodes = q.nodes();
    CVector v = CVector::Zero(g.node_count());
    Complex mean = 0.0;
    for (Index x : nodes) mean += v[x] = normal(rng);
    mean /= static_cast<double>(nodes.size());
    for (Index x : nodes) v[x] -= mean;
    v *= std::pow(q.volume(), -0.5) / lp_norm(v, g, 2.0);
    out.push_back(make_molecule(sg, ScalarField(g, v), q, i % 2 ? MoleculeKind::heat : MoleculeKind::resolvent, params));
  }
  return out;
}

BmoExperiment bmo_experiment(const Context& ctx, const std::vector<ScalarField>& corpus, int duality_pairs) {
  const auto& prm = ctx.config.parameters;
  const int M = prm.M;
  BmoExperiment e;
  e.rows.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& f = corpus[i];
    BmoRow& row = e.rows[i];
    // Roundoff on a constant field stays below 1e-10 ||f||; count it as zero so the ratio is degenerate.
    const double floor = 1e-10 * lp_norm(f.values, ctx.grid, 2.0);
    auto clean = [](double v, double tiny) { return v <= tiny ? 0.0 : v; };
    row.heat = clean(bmo_norm(ctx.sg, f, M, BmoVariant::heat).norm, floor);
    row.resolvent = clean(bmo_norm(ctx.sg, f, M, BmoVariant::resolvent).norm, floor);
    for (double p : prm.p_list)
      row.p_norms.push_back(clean(bmo_norm(ctx.sg, f, M, BmoVariant::p_variant, p).norm, floor));
    row.carleson = clean(carleson_functional(ctx.sg, f, M, ctx.times).carleson_norm, floor * floor);
  }
  std::vector<double> heat, res, car, heat2, jn_num, jn_den;
  for (const auto& r : e.rows) {
    heat.push_back(r.heat);
    res.push_back(r.resolvent);
    car.push_back(r.carleson);
    heat2.push_back(r.heat * r.heat);
  }
  e.heat_resolvent = ratio_spread(heat, res);
  e.carleson_bmo2 = ratio_spread(car, heat2);
  for (std::size_t k = 0; k < prm.p_list.size(); ++k) {
    std::vector<double> pk;
    for (const auto& r : e.rows) {
      pk.push_back(r.p_norms[k]);
      jn_num.push_back(r.p_norms[k]);
      jn_den.push_back(r.heat);
    }
    e.p_vs_2.push_back(ratio_spread(pk, heat));
  }
  e.john_nirenberg = ratio_spread(jn_num, jn_den);

  // |<f, m>| <= C ||f||_BMO(L*) over the molecule corpus.
  if (!corpus.empty()) {
    const Semigroup adj = ctx.sg.adjoint();
    const auto molecules = molecule_corpus(ctx.sg, 20, ctx.config.corpus.seed + 1, ctx.molecule_params());
    for (const auto& f : corpus) {
      const double b = bmo_norm(adj, f, M, BmoVariant::heat).norm;
      if (!(b > 1e-10 * lp_norm(f.values, ctx.grid, 2.0))) continue;
      for (const auto& m : molecules)
        e.molecule_pairing = std::max(e.molecule_pairing, std::abs(inner(f.values, m.field.values, ctx.grid)) / b);
    }
  }

  std::mt19937_64 rng(ctx.config.corpus.seed + 2);
  std::normal_distribution<double> normal;
  for (int i = 0; i < duality_pairs; ++i) {
    CVector a(ctx.grid.node_count()), b(ctx.grid.node_count());
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng);
    a.array() -= a.mean();
    b.array() -= b.mean();
    const ScalarField fa(ctx.grid, a), fb(ctx.grid, b);
    const double scale = lp_norm(a, ctx.grid, 2.0) * lp_norm(b, ctx.grid, 2.0);
    const Complex err = duality_pair(ctx.sg, fa, fb, M, ctx.resolving) - inner(a, b, ctx.grid);
    e.duality_error = std::max(e.duality_error, std::abs(err) / scale);
  }
  return e;
}

std::string bmo_csv(const Context& ctx, const BmoExperiment& e) {
  std::ostringstream os;
  os << "field,heat,resolvent";
  for (double p : ctx.config.parameters.p_list) os << ",p_" << format_number(p);
  os << ",carleson\n";
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    const auto& r = e.rows[i];
    os << i << ',' << format_number(r.heat) << ',' << format_number(r.resolvent);
    for (double x : r.p_norms) os << ',' << format_number(x);
    os << ',' << format_number(r.carleson) << '\n';
  }
  return os.str();
}

// ---- Riesz ----

RieszExperiment riesz_experiment(const Context& ctx) {
  const auto& prm = ctx.config.parameters;
  RieszExperiment e;
  const auto molecules = molecule_corpus(ctx.sg, 20, ctx.config.corpus.seed, ctx.molecule_params());
  e.report = riesz_h1_experiment(molecules, ctx.sg, prm.quad_nodes);

  const Grid& g = ctx.grid;
  const int w = std::max(1, g.size(0) / 16);
  std::vector<Index> E, F;
  for (Index v = 0; v < g.node_count(); ++v) {
    const auto c = g.coords(v);
    if (g.dim() == 2 && c[1] >= w) continue;
    if (c[0] < w) E.push_back(v);
    if (c[0] >= g.size(0) / 2 && c[0] < g.size(0) / 2 + w) F.push_back(v);
  }
  const double d = set_distance(g, E, F);
  std::vector<double> ts;
  for (int i = 0; i <= 8; ++i) ts.push_back(d * d * std::pow(10.0, -4.0 + 2.0 * i / 8));
  e.worst_slope_margin = std::numeric_limits<double>::infinity();
  for (CommutatorTarget target : {CommutatorTarget::g_h, CommutatorTarget::riesz})
    for (int M : {1, 2}) {
      CommutatorStudy s{target, M, commutator_sweep(ctx.sg, target, M, ts, E, F, ctx.times, prm.quad_nodes)};
      e.worst_slope_margin = std::min({e.worst_slope_margin, s.sweep.difference_slope - M, s.sweep.power_slope - M});
      e.commutators.push_back(std::move(s));
    }
  return e;
}

std::string commutator_csv(const RieszExperiment& e) {
  std::ostringstream os;
  os << "target,M,t,dist,difference_norm,power_norm,difference_ratio,power_ratio\n";
  for (const auto& s : e.commutators)
    for (const auto& r : s.sweep.rows)
      os << to_string(s.target) << ',' << s.M << ',' << format_number(r.t) << ',' << format_number(r.dist) << ','
         << format_number(r.difference_norm) << ',' << format_number(r.power_norm) << ','
         << format_number(r.difference_ratio) << ',' << format_number(r.power_ratio) << '\n';
  return os.str();
}

}  // namespace hardy
