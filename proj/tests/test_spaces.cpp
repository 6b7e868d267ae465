#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hardy/corpus.hpp"
#include "hardy/decomposition.hpp"
#include "hardy/error.hpp"
#include "hardy/spaces.hpp"
#include "oracle/brute.hpp"

using namespace hardy;

namespace {

Semigroup engine(const Grid& g, bool random) {
  const auto a = random ? random_elliptic_coefficients(g, 0.5, 2.0, 1) : CoefficientField::identity(g);
  return Semigroup(assemble_operator(g, a));
}

// Direct enumeration: for every ball, every node inside and every time with
// t_j <= dist(y, outside), add h^n w_j |F|^2.
std::vector<double> brute_ball_ratios(const Grid& g, const TimeGrid& tg, const Eigen::MatrixXd& mag,
                                      const std::vector<Ball>& balls) {
  std::vector<double> out;
  for (const auto& b : balls) {
    double mass = 0.0;
    int count = 0;
    for (Index y = 0; y < g.node_count(); ++y) {
      if (!(g.distance(b.centre, y) < b.radius)) continue;
      ++count;
      double depth = std::numeric_limits<double>::infinity();
      for (Index z = 0; z < g.node_count(); ++z)
        if (!(g.distance(b.centre, z) < b.radius)) depth = std::min(depth, g.distance(y, z));
      for (int j = 0; j < tg.count(); ++j)
        if (tg[j] <= depth) mass += g.cell_volume() * tg.weights()[j] * mag(y, j);
    }
    out.push_back(mass / (count * g.cell_volume()));
  }
  return out;
}

SpaceTimeField random_space_time(const Grid& g, const TimeGrid& tg, std::mt19937_64& rng) {
  SpaceTimeField F(g, tg, "random");
  std::normal_distribution<double> n;
  for (Index x = 0; x < g.node_count(); ++x)
    for (int j = 0; j < tg.count(); ++j) F.components[0](x, j) = Complex(n(rng), n(rng));
  return F;
}

}  // namespace

TEST(BmoNorm, ConstantsVanish) {
  for (const Grid& g : {Grid::line(64, 1.0 / 64), Grid::square(16, 16, 1.0 / 16)})
    for (bool random : {false, true}) {
      const Semigroup sg = engine(g, random);
      const ScalarField one = ScalarField::constant(g, 2.5);
      EXPECT_LT(bmo_norm(sg, one, 1, BmoVariant::heat).norm, 1e-10);
      EXPECT_LT(bmo_norm(sg, one, 1, BmoVariant::resolvent).norm, 1e-10);
      EXPECT_LT(bmo_norm(sg, one, 2, BmoVariant::p_variant, 3.0).norm, 1e-10);
      for (double p : john_nirenberg_compare(sg, one, 1, {1.5, 2.0, 3.0}).norms) EXPECT_LT(p, 1e-10);
    }
}

TEST(BmoNorm, FourierModeMatchesSpectralSymbol) {
  const int n = 64;
  const Grid g = Grid::line(n, 1.0 / n);
  const Semigroup sg = engine(g, false);
  const int k = 23;
  const ScalarField f(g, oracle::fourier_mode(n, k));
  const double mu = oracle::fourier_eigenvalue(n, 1.0 / n, k);
  for (int M : {1, 2, 3})
    for (BmoVariant v : {BmoVariant::heat, BmoVariant::resolvent, BmoVariant::p_variant}) {
      const auto r = bmo_norm(sg, f, M, v, 1.5);
      for (const auto& c : r.per_cube) {
        const double s = c.cube.sidelength() * c.cube.sidelength() * mu;
        const double symbol = v == BmoVariant::resolvent ? 1.0 - 1.0 / (1.0 + s) : 1.0 - std::exp(-s);
        // |mode| = 1 at every node, so each cube average is the symbol itself.
        EXPECT_NEAR(c.value, std::pow(symbol, M), 1e-9);
      }
    }
}

TEST(BmoNorm, HomogeneousAndMonotoneInFamily) {
  const Grid g = Grid::square(16, 16, 1.0 / 16);
  const Semigroup sg = engine(g, true);
  const ScalarField f = corpus_element(sg, 3, 0, CorpusKind::smoothed_gaussian);
  const auto full = bmo_norm(sg, f, 1, BmoVariant::heat);
  const auto scaled = bmo_norm(sg, ScalarField(g, Complex(0.0, -3.0) * f.values), 1, BmoVariant::heat);
  EXPECT_NEAR(scaled.norm, 3.0 * full.norm, 1e-12 * full.norm);
  EXPECT_DOUBLE_EQ(full.norm, full.per_cube[full.argmax].value);
  auto family = bmo_cube_family(g);
  std::vector<Cube> sub;
  for (std::size_t i = 0; i < family.size(); i += 3) sub.push_back(family[i]);
  EXPECT_LE(bmo_norm(sg, f, 1, BmoVariant::heat, 2.0, sub).norm, full.norm);
  EXPECT_THROW(bmo_norm(sg, f, 0, BmoVariant::heat), InvalidArgument);
}

TEST(BmoNorm, CubeFamilyShape) {
  const Grid g1 = Grid::line(16, 1.0 / 16);
  // Sides 2, 4, 8 at all 16 positions, plus the whole grid once.
  EXPECT_EQ(bmo_cube_family(g1).size(), 3u * 16u + 1u);
  const Grid g2 = Grid::square(8, 8, 1.0 / 8);
  EXPECT_EQ(bmo_cube_family(g2).size(), 16u + 4u + 1u);
  for (const auto& c : bmo_cube_family(g2)) EXPECT_GE(c.count(), 2);
}

TEST(BmoNorm, JohnNirenbergTableConventions) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = engine(g, true);
  const ScalarField f = corpus_element(sg, 4, 1, CorpusKind::mixed);
  const auto t = john_nirenberg_compare(sg, f, 1, {1.5, 2.0, 3.0});
  EXPECT_EQ(t.norms[1], bmo_norm(sg, f, 1, BmoVariant::heat).norm);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(t.ratios(i, i), 1.0);
  // Jensen: cube averages of |g|^p increase with p.
  EXPECT_LE(t.norms[0], t.norms[1]);
  EXPECT_LE(t.norms[1], t.norms[2]);
}

TEST(BmoNorm, CorpusRatiosAreStable) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = engine(g, true);
  double hr_lo = 1e300, hr_hi = 0, jn_lo = 1e300, jn_hi = 0;
  for (const auto& f : make_corpus(sg, 20, 11, CorpusKind::mixed)) {
    const double h = bmo_norm(sg, f, 1, BmoVariant::heat).norm;
    const double r = bmo_norm(sg, f, 1, BmoVariant::resolvent).norm;
    hr_lo = std::min(hr_lo, h / r);
    hr_hi = std::max(hr_hi, h / r);
    const auto t = john_nirenberg_compare(sg, f, 1, {1.5, 2.0, 3.0});
    for (double q : {t.ratios(0, 1), t.ratios(2, 1)}) {
      jn_lo = std::min(jn_lo, q);
      jn_hi = std::max(jn_hi, q);
    }
  }
  EXPECT_LE(hr_hi / hr_lo, 25.0);
  EXPECT_LE(jn_hi / jn_lo, 25.0);
  RecordProperty("heat_resolvent_spread", std::to_string(hr_hi / hr_lo));
}

TEST(Carleson, MatchesBruteForceEnumeration) {
  for (const Grid& g : {Grid::line(32, 1.0 / 32), Grid::square(8, 8, 1.0 / 8)})
    for (bool random : {false, true}) {
      const Semigroup sg = engine(g, random);
      const oracle::DenseCalculus dense(g, random ? random_elliptic_coefficients(g, 0.5, 2.0, 1)
                                                  : CoefficientField::identity(g));
      const ScalarField f = corpus_element(sg, 5, 0, CorpusKind::smoothed_gaussian);
      const TimeGrid tg = TimeGrid::standard(g, 24);
      for (int M : {1, 2}) {
        Eigen::MatrixXd mag(g.node_count(), tg.count());
        for (int j = 0; j < tg.count(); ++j) {
          const double s = tg[j] * tg[j];
          CVector u = dense.heat(s, f.values);
          for (int r = 0; r < M; ++r) u = s * (dense.L * u);
          mag.col(j) = u.cwiseAbs2();
        }
        const auto balls = ball_family(g);
        const auto expect = brute_ball_ratios(g, tg, mag, balls);
        const auto rep = carleson_functional(sg, f, M, tg);
        ASSERT_EQ(rep.per_ball.size(), expect.size());
        double top = 0.0;
        for (std::size_t b = 0; b < expect.size(); ++b) {
          EXPECT_NEAR(rep.per_ball[b].ratio, expect[b], 1e-9 * (1.0 + expect[b]));
          top = std::max(top, expect[b]);
        }
        EXPECT_NEAR(rep.carleson_norm, top, 1e-9 * top);
      }
    }
}

TEST(Carleson, ConstantsAndScaling) {
  const Grid g = Grid::square(16, 16, 1.0 / 16);
  const Semigroup sg = engine(g, true);
  const TimeGrid tg = TimeGrid::standard(g, 32);
  EXPECT_LT(carleson_functional(sg, ScalarField::constant(g, 1.0), 1, tg).carleson_norm, 1e-10);
  const ScalarField f = corpus_element(sg, 6, 2, CorpusKind::mixed);
  const double base = carleson_functional(sg, f, 1, tg).carleson_norm;
  const double scaled = carleson_functional(sg, ScalarField(g, -1.7 * f.values), 1, tg).carleson_norm;
  EXPECT_NEAR(scaled, 1.7 * 1.7 * base, 1e-12 * scaled);
}

TEST(Carleson, BallFamilyEndsWithACoveringBall) {
  const Grid g = Grid::line(32, 1.0 / 32);
  const auto balls = ball_family(g);
  EXPECT_DOUBLE_EQ(balls.front().radius, 2.0 / 32);
  EXPECT_DOUBLE_EQ(balls.back().radius, 1.0);
  EXPECT_EQ(balls.size(), 5u * 32u);
}

TEST(Carleson, SandwichWithBmoOverCorpus) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = engine(g, false);
  const TimeGrid tg = TimeGrid::standard(g, 64);
  double lo = 1e300, hi = 0.0;
  for (const auto& f : make_corpus(sg, 20, 12, CorpusKind::mixed)) {
    const double b = bmo_norm(sg, f, 1, BmoVariant::heat).norm;
    const double c = carleson_functional(sg, f, 1, tg).carleson_norm;
    lo = std::min(lo, c / (b * b));
    hi = std::max(hi, c / (b * b));
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi / lo, 25.0);
  RecordProperty("carleson_bmo2_spread", std::to_string(hi / lo));
}

TEST(TentNorms, ZeroField) {
  const Grid g = Grid::line(16, 1.0 / 16);
  const SpaceTimeField F(g, TimeGrid::standard(g, 16), "zero");
  const auto n = tent_norms(F);
  EXPECT_EQ(n.t1, 0.0);
  EXPECT_EQ(n.tinf, 0.0);
}

TEST(TentNorms, SingleCellByEnumeration) {
  const Grid g = Grid::line(32, 1.0 / 32);
  const TimeGrid tg = TimeGrid::standard(g, 20);
  for (int j0 : {2, 9, 15})
    for (Index y0 : {0, 13}) {
      SpaceTimeField F(g, tg, "cell");
      F.components[0](y0, j0) = 1.0;
      Eigen::MatrixXd mag = F.magnitude2();
      // T1: S F(x)^2 = h w t^{-1} for x in the cone over (y0, t_j0).
      const double h = g.spacing(), t = tg[j0], w = tg.weights()[j0];
      double t1 = 0.0;
      for (Index x = 0; x < g.node_count(); ++x)
        if (g.distance(x, y0) < t) t1 += h * std::sqrt(h * w / t);
      const auto ratios = brute_ball_ratios(g, tg, mag, ball_family(g));
      const double tinf = std::sqrt(*std::max_element(ratios.begin(), ratios.end()));
      const auto n = tent_norms(F);
      EXPECT_NEAR(n.t1, t1, 1e-12 * t1);
      EXPECT_NEAR(n.tinf, tinf, 1e-12 * (tinf + 1e-300));
    }
}

TEST(TentNorms, CarlesonFunctionIsSupOverContainingBalls) {
  const Grid g = Grid::square(8, 8, 1.0 / 8);
  const TimeGrid tg = TimeGrid::standard(g, 16);
  std::mt19937_64 rng(4);
  const SpaceTimeField F = random_space_time(g, tg, rng);
  const auto balls = ball_family(g);
  const auto ratios = brute_ball_ratios(g, tg, F.magnitude2(), balls);
  const Eigen::VectorXd c = real_values(carleson_function(F));
  for (Index x = 0; x < g.node_count(); ++x) {
    double best = 0.0;
    for (std::size_t b = 0; b < balls.size(); ++b)
      if (g.distance(balls[b].centre, x) < balls[b].radius) best = std::max(best, std::sqrt(ratios[b]));
    EXPECT_NEAR(c[x], best, 1e-12 * best);
  }
}

TEST(TentNorms, DualityInequalityOnRandomPairs) {
  const Grid g = Grid::line(32, 1.0 / 32);
  const TimeGrid tg(g.spacing() / 4, g.extent(), 32);
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const SpaceTimeField F = random_space_time(g, tg, rng);
    const SpaceTimeField G = random_space_time(g, tg, rng);
    Complex pairing = 0.0;
    for (Index y = 0; y < g.node_count(); ++y)
      for (int j = 0; j < tg.count(); ++j)
        pairing += g.cell_volume() * tg.weights()[j] * F.components[0](y, j) * std::conj(G.components[0](y, j));
    const Eigen::VectorXd cf = real_values(carleson_function(F));
    const Eigen::VectorXd sg = real_values(cone_integrate(G, ConeSpec{}));
    const double rhs = g.cell_volume() * cf.dot(sg);
    worst = std::max(worst, std::abs(pairing) / rhs);
  }
  RecordProperty("tent_duality_ratio", std::to_string(worst));
  EXPECT_LE(worst, 10.0);
}

TEST(Duality, ConstantAndZero) {
  EXPECT_DOUBLE_EQ(duality_constant(1), 8.0);
  EXPECT_DOUBLE_EQ(duality_constant(2), 8.0);
  EXPECT_DOUBLE_EQ(duality_constant(3), 32.0 / 6.0);
  const Grid g = Grid::line(32, 1.0 / 32);
  const Semigroup sg = engine(g, false);
  const ScalarField f = corpus_element(sg, 1, 0, CorpusKind::mixed);
  EXPECT_EQ(duality_pair(sg, ScalarField(g), f, 1, TimeGrid::resolving(g)), Complex(0.0));
}

TEST(Duality, MatchesInnerProduct) {
  for (const Grid& g : {Grid::line(64, 1.0 / 64), Grid::square(16, 16, 1.0 / 16)})
    for (bool random : {false, true}) {
      const Semigroup sg = engine(g, random);
      std::mt19937_64 rng(13);
      const TimeGrid tg = TimeGrid::resolving(g, 96);
      for (int trial = 0; trial < 20; ++trial) {
        const ScalarField f(g, oracle::random_mean_zero(g.node_count(), rng));
        const ScalarField h(g, oracle::random_mean_zero(g.node_count(), rng));
        for (int M : {1, 2}) {
          const Complex direct = inner(f.values, h.values, g);
          const double scale = lp_norm(f.values, g, 2.0) * lp_norm(h.values, g, 2.0);
          EXPECT_LT(std::abs(duality_pair(sg, f, h, M, tg) - direct), 1e-6 * scale);
        }
      }
    }
}

TEST(Duality, MoleculePairingBoundedByBmo) {
  const Grid g = Grid::line(64, 1.0 / 64);
  const Semigroup sg = engine(g, true);
  const Semigroup adj = sg.adjoint();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  const auto corpus = make_corpus(sg, 5, 14, CorpusKind::mixed);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int count = 1 << (1 + i % 4);
    const Cube q(g, {static_cast<int>(rng() % 64), 0}, count);
    CVector v = CVector::Zero(64);
    for (Index x : q.nodes()) v[x] = normal(rng);
    v *= std::pow(q.volume(), -0.5) / lp_norm(v, g, 2.0);
    const Molecule m = make_molecule(sg, ScalarField(g, v), q, MoleculeKind::heat);
    ASSERT_TRUE(m.report.pass);
    for (const auto& f : corpus) {
      const double b = bmo_norm(adj, f, 1, BmoVariant::heat).norm;
      worst = std::max(worst, std::abs(inner(f.values, m.field.values, g)) / b);
    }
  }
  RecordProperty("molecule_pairing_over_bmo", std::to_string(worst));
  EXPECT_LT(worst, 10.0);
}

TEST(SpacesExport, CsvAndJson) {
  const Grid g = Grid::line(16, 1.0 / 16);
  const Semigroup sg = engine(g, false);
  const ScalarField f = corpus_element(sg, 2, 0, CorpusKind::mixed);
  const auto r = bmo_norm(sg, f, 1, BmoVariant::resolvent);
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.rfind("variant,M,p,corner0,corner1,side,value\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), r.per_cube.size() + 1);
  const Json j = summary_json(r);
  EXPECT_EQ(j["variant"], "resolvent");
  EXPECT_EQ(j["norm"].get<double>(), r.norm);
  const auto c = carleson_functional(sg, f, 1, TimeGrid::standard(g, 16));
  EXPECT_EQ(summary_json(c, g)["carleson_norm"].get<double>(), c.carleson_norm);
  EXPECT_EQ(to_csv(c, g).rfind("centre,x0,radius,mass,ratio\n", 0), 0u);
}
