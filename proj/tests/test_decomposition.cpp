#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "hardy/decomposition.hpp"
#include "hardy/error.hpp"
#include "oracle/brute.hpp"

using namespace hardy;

namespace {

Semigroup identity_engine(const Grid& g) { return Semigroup(assemble_operator(g, CoefficientField::identity(g))); }

std::vector<Index> range_nodes(Index a, Index b) {
  std::vector<Index> v;
  for (Index x = a; x < b; ++x) v.push_back(x);
  return v;
}

// Brute-force min distance from a node to the complement of a set.
double brute_gap(const Grid& g, const std::vector<char>& in, Index x) {
  double best = std::numeric_limits<double>::infinity();
  for (Index z = 0; z < g.node_count(); ++z)
    if (!in[z]) best = std::min(best, g.distance(x, z));
  return best;
}

ScalarField bump(const Grid& g, double centre, double width) {
  CVector v(g.node_count());
  for (Index x = 0; x < g.node_count(); ++x) {
    const double d = g.position(x, 0) - centre;
    v[x] = std::exp(-d * d / (2 * width * width));
  }
  v.array() -= v.mean();
  v /= lp_norm(v, g, 2.0);
  return {g, v};
}

ScalarField smoothed_noise(const Semigroup& sg, std::mt19937_64& rng, double s) {
  const Grid& g = sg.grid();
  CVector v = oracle::random_mean_zero(g.node_count(), rng);
  v = sg.heat(s, v);
  v /= lp_norm(v, g, 2.0);
  return {g, v};
}

}  // namespace

TEST(Calderon, ValueForMEqualsOne) { EXPECT_NEAR(calderon_constant(1), 27.0, 1e-12); }

TEST(Calderon, ReproducesUnitMassOnTheScalarProfile) {
  boost::math::quadrature::exp_sinh<double> integrator;
  for (int M : {1, 2, 3})
    for (double mu : {0.3, 7.0, 2500.0}) {
      const double a = M + 2;
      auto profile = [&](double t) {
        const double u = t * t * mu;
        return u > 0.0 ? std::exp(a * (std::log(u) - u)) / t : 0.0;
      };
      const double integral = integrator.integrate(profile, 1e-14);
      EXPECT_NEAR(calderon_constant(M) * integral, 1.0, 1e-10) << "M=" << M << " mu=" << mu;
    }
  EXPECT_THROW(calderon_constant(0), InvalidArgument);
}

TEST(DensityExpansion, TrivialSets) {
  const Grid g = Grid::line(32, 1.0 / 32);
  EXPECT_TRUE(density_expansion(g, {}, 0.5).nodes.empty());
  const auto all = range_nodes(0, 32);
  EXPECT_EQ(density_expansion(g, all, 0.5).nodes, all);
  EXPECT_THROW(density_expansion(g, all, 1.0), InvalidArgument);
}

TEST(DensityExpansion, MatchesBruteForceThreshold) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const auto O = range_nodes(28, 36);
  for (double gamma : {0.5, 0.75, 0.875}) {
    const auto e = density_expansion(g, O, gamma);
    const Eigen::VectorXd m = oracle::hl_max(g, ScalarField::indicator(g, O).values);
    std::vector<Index> expect;
    for (Index x = 0; x < g.node_count(); ++x)
      if (m[x] > 1.0 - gamma) expect.push_back(x);
    EXPECT_EQ(e.nodes, expect) << gamma;
    EXPECT_TRUE(std::includes(e.nodes.begin(), e.nodes.end(), O.begin(), O.end()));
    EXPECT_NEAR(e.growth, static_cast<double>(expect.size()) / O.size(), 1e-15);
  }
  // Larger gamma admits more of the surrounding nodes.
  EXPECT_GT(density_expansion(g, O, 0.875).nodes.size(), density_expansion(g, O, 0.5).nodes.size());
}

TEST(Whitney, TrivialSets) {
  const Grid g = Grid::line(64, 1.0 / 64);
  EXPECT_TRUE(whitney_decompose({}, g).cubes.empty());
  const auto w = whitney_decompose({17}, g);
  ASSERT_EQ(w.cubes.size(), 1u);
  EXPECT_EQ(w.cubes[0].count(), 1);
  EXPECT_TRUE(w.cubes[0].contains(17));
  EXPECT_FALSE(w.whole_grid);
  const auto whole = whitney_decompose(range_nodes(0, 64), g);
  EXPECT_TRUE(whole.whole_grid);
  ASSERT_EQ(whole.cubes.size(), 1u);
  EXPECT_EQ(whole.cubes[0].count(), 64);
}

namespace {

void check_whitney(const Grid& g, const std::vector<Index>& set) {
  const auto w = whitney_decompose(set, g);
  std::vector<char> in(g.node_count(), 0);
  for (Index x : set) in[x] = 1;
  std::vector<int> hits(g.node_count(), 0);
  for (const auto& q : w.cubes) {
    double dist = std::numeric_limits<double>::infinity();
    for (Index x : q.nodes()) {
      ++hits[x];
      dist = std::min(dist, brute_gap(g, in, x));
    }
    EXPECT_LE(whitney_c1 * dist, q.sidelength() * (1 + 1e-12));
    EXPECT_LE(q.sidelength(), whitney_c2 * dist * (1 + 1e-12));
  }
  for (Index x = 0; x < g.node_count(); ++x) {
    EXPECT_EQ(hits[x] > 0, in[x] == 1) << x;
    EXPECT_LE(hits[x], w.overlap_bound);
  }
}

}  // namespace

TEST(Whitney, IntervalComparabilityExhaustive) {
  const Grid g = Grid::line(128, 1.0 / 128);
  const auto set = range_nodes(40, 80);
  check_whitney(g, set);
  const auto w = whitney_decompose(set, g);
  // Sides shrink toward the boundary: the cubes touching it are single cells,
  // and the side never decreases moving inward.
  auto cubes = w.cubes;
  std::sort(cubes.begin(), cubes.end(), [](const Cube& a, const Cube& b) { return a.corner()[0] < b.corner()[0]; });
  EXPECT_EQ(cubes.front().count(), 1);
  EXPECT_EQ(cubes.back().count(), 1);
  const std::size_t mid = cubes.size() / 2;
  for (std::size_t i = 1; i <= mid; ++i) EXPECT_GE(cubes[i].count(), cubes[i - 1].count());
  for (std::size_t i = mid; i + 1 < cubes.size(); ++i) EXPECT_GE(cubes[i].count(), cubes[i + 1].count());
  int widest = 0;
  for (const auto& q : cubes) widest = std::max(widest, q.count());
  EXPECT_GT(widest, 4);
}

TEST(Whitney, RandomSetsPredicates) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.6);
  const Grid g1 = Grid::line(64, 1.0 / 64);
  const Grid g2 = Grid::square(16, 16, 1.0 / 16);
  for (int trial = 0; trial < 5; ++trial)
    for (const Grid* g : {&g1, &g2}) {
      // Blobs rather than salt-and-pepper noise, so large cubes appear.
      std::vector<Index> set;
      const Index c = rng() % g->node_count();
      const double r = 0.1 + 0.3 * (trial / 5.0);
      for (Index x = 0; x < g->node_count(); ++x)
        if (g->distance(x, c) < r || (g->distance(x, c) < r + 0.1 && coin(rng))) set.push_back(x);
      check_whitney(*g, set);
    }
}

TEST(Whitney, Deterministic) {
  const Grid g = Grid::square(16, 16, 1.0 / 16);
  std::vector<Index> set;
  for (Index x = 0; x < g.node_count(); ++x)
    if (g.distance(x, 100) < 0.3) set.push_back(x);
  const auto a = whitney_decompose(set, g), b = whitney_decompose(set, g);
  ASSERT_EQ(a.cubes.size(), b.cubes.size());
  for (std::size_t i = 0; i < a.cubes.size(); ++i) EXPECT_TRUE(a.cubes[i] == b.cubes[i]);
}

TEST(Tents, MonotoneInTime) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const TentRegion tent(g, range_nodes(10, 40));
  const TimeGrid tg(1e-3, 1.0, 40);
  for (Index x = 0; x < g.node_count(); ++x)
    for (int j = 1; j < tg.count(); ++j)
      if (tent.contains(x, tg[j])) EXPECT_TRUE(tent.contains(x, tg[j - 1]));
}

TEST(Tents, TrivialCases) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const auto Ok = range_nodes(8, 48);
  const auto w = whitney_decompose(Ok, g);
  const TimeGrid tg(1e-3, 1.0, 32);
  const TentRegion full(g, Ok);
  for (const auto& q : w.cubes) {
    const auto same = build_truncated_tents(g, Ok, Ok, q);
    const auto none = build_truncated_tents(g, Ok, {}, q);
    for (Index x = 0; x < g.node_count(); ++x)
      for (double t : tg.samples()) {
        EXPECT_FALSE(same.contains(x, t));
        EXPECT_EQ(none.contains(x, t), q.contains(x) && full.contains(x, t));
      }
  }
}

TEST(Tents, NestedLevelsPartitionExhaustively) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const std::vector<std::vector<Index>> levels{range_nodes(0, 64), range_nodes(4, 60), range_nodes(12, 40),
                                               range_nodes(20, 30), {}};
  const TimeGrid tg(1.0 / 256, 4.0, 48);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(g.node_count(), tg.count());
  for (std::size_t k = 0; k + 1 < levels.size(); ++k)
    for (const auto& q : whitney_decompose(levels[k], g).cubes) {
      const auto tent = build_truncated_tents(g, levels[k], levels[k + 1], q);
      for (Index x = 0; x < g.node_count(); ++x)
        for (int j = 0; j < tg.count(); ++j) count(x, j) += tent.contains(x, tg[j]) ? 1 : 0;
    }
  // The bottom level is the whole grid, so every cell lies in exactly one tent.
  EXPECT_EQ(count.minCoeff(), 1);
  EXPECT_EQ(count.maxCoeff(), 1);
}

TEST(Molecules, ZeroFieldIsValid) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const Cube q(g, {16, 0}, 8);
  const Molecule m = make_molecule(sg, ScalarField(g), q, MoleculeKind::heat);
  EXPECT_TRUE(m.report.pass);
  for (const auto& r : m.report.rows) EXPECT_EQ(r.measured, 0.0);
  EXPECT_EQ(molecular_norm(sg, ScalarField(g), q, {}), 0.0);
}

TEST(Molecules, IndicatorSizeCheckByHand) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const Cube q(g, {24, 0}, 8);
  const double vol = 8.0 / 64.0;
  const ScalarField m(g, ScalarField::indicator(g, q.nodes()).values / vol);
  for (double p : {1.0, 1.5, 2.0}) {
    const MoleculeParams params{p, 1.0, 1};
    const auto r = molecule_report(sg, m, q, params, 0);
    ASSERT_FALSE(r.rows.empty());
    EXPECT_EQ(r.rows[0].annulus, 0);
    // || |Q|^{-1} 1_Q ||_{L^p(Q)} = |Q|^{-1} |Q|^{1/p}, which equals the bound.
    EXPECT_NEAR(r.rows[0].measured, std::pow(vol, 1.0 / p - 1.0), 1e-12);
    EXPECT_NEAR(r.rows[0].bound, std::pow(vol, 1.0 / p - 1.0), 1e-12);
    EXPECT_TRUE(r.pass);
    const ScalarField over(g, 1.01 * m.values);
    EXPECT_FALSE(molecule_report(sg, over, q, params, 0).pass);
  }
}

TEST(Molecules, HeatAndResolventKindsDifferAndValidate) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const Cube q(g, {20, 0}, 8);
  CVector v = CVector::Zero(64);
  for (Index x : q.nodes()) v[x] = std::sin(0.7 * x) + 0.3;
  v *= std::pow(q.volume(), -0.5) / lp_norm(v, g, 2.0);
  for (int M : {1, 2}) {
    const MoleculeParams params{2.0, 1.0, M};
    const Molecule h = make_molecule(sg, ScalarField(g, v), q, MoleculeKind::heat, params);
    const Molecule r = make_molecule(sg, ScalarField(g, v), q, MoleculeKind::resolvent, params);
    EXPECT_TRUE(h.report.pass);
    EXPECT_TRUE(r.report.pass);
    EXPECT_TRUE(validate_molecule(sg, h).pass);
    EXPECT_GT(oracle::rel_err(h.field.values, r.field.values), 1e-3);
    // Normalized to touch the tightest bound exactly.
    EXPECT_NEAR(h.report.worst_ratio, 1.0, 1e-12);
    const double norm = molecular_norm(sg, h.field, q, params);
    EXPECT_LE(norm, M + 1.0 + 1e-9);
    EXPECT_NEAR(molecular_norm(sg, ScalarField(g, -2.5 * h.field.values), q, params), 2.5 * norm, 1e-12 * norm);
  }
}

TEST(Molecules, Preconditions) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const Cube q(g, {20, 0}, 8);
  EXPECT_THROW(make_molecule(sg, ScalarField::indicator(g, {5}), q, MoleculeKind::heat), InvalidArgument);
  const ScalarField heavy(g, 100.0 * ScalarField::indicator(g, {21}).values);
  EXPECT_THROW(make_molecule(sg, heavy, q, MoleculeKind::heat), InvalidArgument);
  // Kernel components cannot be lifted by L^{-1}.
  EXPECT_THROW(molecule_report(sg, ScalarField::constant(g, 1.0), q, {}, 1), KernelComponent);
}

TEST(Decomposition, ZeroInput) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const auto d = molecular_decompose(sg, ScalarField(g), TimeGrid::resolving(g));
  EXPECT_TRUE(d.terms.empty());
  EXPECT_EQ(d.residual_norm, 0.0);
  const auto e = h1_norm_estimate(sg, ScalarField(g), TimeGrid::resolving(g));
  EXPECT_EQ(e.weight_sum, 0.0);
  EXPECT_EQ(e.f_l1, 0.0);
  EXPECT_EQ(e.estimate, 0.0);
  EXPECT_THROW(molecular_decompose(sg, ScalarField::constant(g, 1.0), TimeGrid::resolving(g)), KernelComponent);
}

TEST(Decomposition, BumpReconstructsAndMoleculesValidate) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  const ScalarField f = bump(g, 0.4, 0.05);
  const TimeGrid tg = TimeGrid::resolving(g, 64);
  const auto d = molecular_decompose(sg, f, tg);
  EXPECT_LE(d.relative_residual, 1e-3);
  EXPECT_TRUE(d.all_valid);
  ASSERT_FALSE(d.terms.empty());
  const double C = calderon_constant(1);
  for (const auto& t : d.terms) {
    EXPECT_NEAR(t.weight / (std::ldexp(1.0, t.level) * t.cube.volume()), C, 1e-12 * C);
    Molecule m{ScalarField(g, t.molecule.values / d.normalization), t.cube, d.options.molecule, d.normalization, {}};
    EXPECT_TRUE(validate_molecule(sg, m).pass);
  }
  const auto e = h1_norm_estimate(d, f);
  RecordProperty("weight_over_square", std::to_string(d.weight_sum / e.square_l1));
  RecordProperty("normalization", std::to_string(d.normalization));
  EXPECT_GT(d.weight_sum / e.square_l1, 1.0 / 64);
  EXPECT_LT(d.weight_sum / e.square_l1, 64.0);
}

TEST(Decomposition, TermTentsPartitionTheLattice) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  std::mt19937_64 rng(11);
  const ScalarField f = smoothed_noise(sg, rng, 2e-4);
  const TimeGrid tg = TimeGrid::resolving(g, 32);
  const auto d = molecular_decompose(sg, f, tg);
  std::vector<TentRegion> tents;
  for (const auto& lv : d.levels) tents.emplace_back(g, lv.expanded.nodes);
  tents.emplace_back(g, std::vector<Index>{});
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(g.node_count(), tg.count());
  for (std::size_t l = 0; l < d.levels.size(); ++l)
    for (const auto& q : d.levels[l].whitney.cubes) {
      const TruncatedTent tent{q, tents[l], tents[l + 1]};
      for (Index x = 0; x < g.node_count(); ++x)
        for (int j = 0; j < tg.count(); ++j) count(x, j) += tent.contains(x, tg[j]) ? 1 : 0;
    }
  EXPECT_LE(count.maxCoeff(), 1);
  // The lowest level holds every node, so nothing is left out either.
  EXPECT_EQ(count.minCoeff(), 1);
}

TEST(Decomposition, ReconstructionImprovesUnderRefinement) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  std::mt19937_64 rng(5);
  const ScalarField f = smoothed_noise(sg, rng, 3e-4);
  double prev = std::numeric_limits<double>::infinity();
  for (int count : {16, 32, 64, 128}) {
    const double r = molecular_decompose(sg, f, TimeGrid::resolving(g, count)).residual_norm;
    EXPECT_LE(r, prev) << count;
    prev = r;
  }
  EXPECT_LT(prev, 1e-8);
}

TEST(Decomposition, ScalingShiftsLevels) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = identity_engine(g);
  std::mt19937_64 rng(9);
  const TimeGrid tg = TimeGrid::resolving(g, 48);
  for (int trial = 0; trial < 3; ++trial) {
    const ScalarField f = smoothed_noise(sg, rng, 2e-4);
    const double base = molecular_decompose(sg, f, tg).weight_sum;
    for (double c : {3.0, -5.0, 0.3}) {
      const double scaled = molecular_decompose(sg, ScalarField(g, c * f.values), tg).weight_sum;
      EXPECT_GE(scaled / base, std::abs(c) / 2);
      EXPECT_LE(scaled / base, 2 * std::abs(c));
    }
    const auto e1 = h1_norm_estimate(sg, f, tg);
    const auto e2 = h1_norm_estimate(sg, ScalarField(g, 2.0 * f.values), tg);
    EXPECT_GE(e2.estimate / e1.estimate, 1.0);
    EXPECT_LE(e2.estimate / e1.estimate, 4.0);
  }
}

TEST(Decomposition, EstimateStableOverRandomCorpus) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg(assemble_operator(g, random_elliptic_coefficients(g, 0.5, 2.0, 1)));
  std::mt19937_64 rng(21);
  const TimeGrid tg = TimeGrid::resolving(g, 64);
  double lo = 1e300, hi = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ScalarField f = smoothed_noise(sg, rng, 1e-4 * (1 + i % 5));
    const auto d = molecular_decompose(sg, f, tg);
    EXPECT_LE(d.relative_residual, 1e-3);
    EXPECT_TRUE(d.all_valid);
    const auto e = h1_norm_estimate(d, f);
    const double r = e.estimate / (e.square_l1 + e.f_l1);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  RecordProperty("estimate_ratio_min", std::to_string(lo));
  RecordProperty("estimate_ratio_max", std::to_string(hi));
  EXPECT_LE(hi / lo, 4.0);
}

TEST(Decomposition, TwoDimensionalRandomCoefficients) {
  const Grid g = Grid::square(16, 16, 1.0 / 16);
  const Semigroup sg(assemble_operator(g, random_elliptic_coefficients(g, 0.5, 2.0, 1)));
  std::mt19937_64 rng(2);
  const ScalarField f = smoothed_noise(sg, rng, 1e-3);
  const auto d = molecular_decompose(sg, f, TimeGrid::resolving(g, 64));
  EXPECT_LE(d.relative_residual, 1e-3);
  EXPECT_TRUE(d.all_valid);
}

TEST(Decomposition, ExportFormats) {
  const Grid g = Grid::line(32, 1.0 / 32);
  const Semigroup sg = identity_engine(g);
  const auto d = molecular_decompose(sg, bump(g, 0.5, 0.1), TimeGrid::resolving(g, 32));
  const Json j = to_json(d);
  EXPECT_EQ(j["metadata"]["C_M"].get<double>(), 27.0);
  ASSERT_EQ(j["terms"].size(), d.terms.size());
  ASSERT_EQ(j["molecules"].size(), d.terms.size());
  EXPECT_EQ(j["molecules"][0].size(), 64u);
  const std::string csv = summary_csv(d);
  EXPECT_EQ(csv.rfind("k,j,lambda,sidelength,required_normalization,valid\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), d.terms.size() + 1);
  EXPECT_EQ(summary_csv(molecular_decompose(sg, bump(g, 0.5, 0.1), TimeGrid::resolving(g, 32))), csv);
}
