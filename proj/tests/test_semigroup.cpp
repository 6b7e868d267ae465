#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hardy/error.hpp"
#include "hardy/semigroup.hpp"
#include "oracle/dense.hpp"

using namespace hardy;

namespace {

SemigroupOptions with(Backend b) {
  SemigroupOptions o;
  o.backend = b;
  return o;
}

struct Case {
  Grid grid;
  CoefficientField coeff;
  DiscreteOperator op;
};

Case random_case(const Grid& g, std::uint64_t seed = 1) {
  auto a = random_elliptic_coefficients(g, 0.5, 2.0, seed);
  auto op = assemble_operator(g, a);
  return {g, a, op};
}

Case identity_case(const Grid& g) {
  auto a = CoefficientField::identity(g);
  return {g, a, assemble_operator(g, a)};
}

CVector point_mass(const Grid& g, Index at) {
  CVector v = CVector::Zero(g.node_count());
  v[at] = 1.0 / g.cell_volume();
  return v;
}

}  // namespace

class BothBackends : public ::testing::TestWithParam<Backend> {};

TEST_P(BothBackends, HeatAtZeroIsIdentity) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16));
  const Semigroup sg(c.op, with(GetParam()));
  std::mt19937_64 rng(1);
  const CVector f = oracle::random_field(c.grid.node_count(), rng);
  EXPECT_EQ((sg.heat(0.0, f) - f).norm(), 0.0);
  EXPECT_THROW(sg.heat(-1e-3, f), InvalidArgument);
}

TEST_P(BothBackends, HeatPreservesConstants) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16));
  const Semigroup sg(c.op, with(GetParam()));
  const CVector one = CVector::Ones(c.grid.node_count());
  for (double t : {1e-4, 0.01, 0.3, 2.0, 20.0}) EXPECT_LT((sg.heat(t, one) - one).cwiseAbs().maxCoeff(), 1e-10);
}

TEST_P(BothBackends, HeatMatchesDenseExponential) {
  for (auto b : {Boundary::periodic, Boundary::dirichlet}) {
    const auto c = random_case(Grid({16, 16}, 1.0 / 16, b));
    const Semigroup sg(c.op, with(GetParam()));
    const oracle::Dense L = oracle::operator_matrix(c.grid, c.coeff);
    const CVector f = point_mass(c.grid, 37);
    for (double t : {1e-3, 0.1, 1.0}) {
      const CVector ref = oracle::expm_apply(L, t, f);
      EXPECT_LE(oracle::rel_err(sg.heat(t, f), ref), 1e-8) << "t=" << t;
    }
  }
}

TEST_P(BothBackends, SemigroupLaw) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 3);
  const Semigroup sg(c.op, with(GetParam()));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = ud(rng), t = ud(rng);
    const CVector f = oracle::random_field(c.grid.node_count(), rng);
    const CVector lhs = sg.heat(s, sg.heat(t, f));
    const CVector rhs = sg.heat(s + t, f);
    EXPECT_LE(oracle::rel_err(lhs, rhs), 1e-9);
  }
}

TEST_P(BothBackends, AdjointDuality) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 5);
  const Semigroup sg(c.op, with(GetParam()));
  const Semigroup adj = sg.adjoint();
  std::mt19937_64 rng(3);
  for (double t : {0.001, 0.05, 0.7}) {
    const CVector f = oracle::random_field(c.grid.node_count(), rng);
    const CVector g = oracle::random_field(c.grid.node_count(), rng);
    const Complex lhs = inner(sg.heat(t, f), g, c.grid);
    const Complex rhs = inner(f, adj.heat(t, g), c.grid);
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::abs(lhs));
  }
}

TEST_P(BothBackends, PoissonFourierMode) {
  const int n = 64;
  const auto c = identity_case(Grid::line(n, 1.0 / n));
  const Semigroup sg(c.op, with(GetParam()));
  for (int k : {1, 5, 32}) {
    const CVector f = oracle::fourier_mode(n, k);
    const double mu = oracle::fourier_eigenvalue(n, 1.0 / n, k);
    const CVector ref = std::exp(-0.4 * std::sqrt(mu)) * f;
    EXPECT_LE((sg.poisson(0.4, f) - ref).norm() / f.norm(), 1e-7) << "k=" << k;
  }
  const CVector one = CVector::Ones(n);
  EXPECT_LT((sg.poisson(0.4, one) - one).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((sg.poisson(100.0, one) - one).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ((sg.poisson(0.0, one) - one).norm(), 0.0);
}

TEST_P(BothBackends, SubordinationConsistency) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 2);
  const Semigroup sg(c.op, with(GetParam()));
  std::mt19937_64 rng(4);
  const CVector f = oracle::random_field(c.grid.node_count(), rng);
  for (auto [s, t] : {std::pair{0.01, 0.02}, {0.1, 0.3}, {0.5, 1.0}}) {
    const CVector lhs = sg.poisson(t, sg.poisson(s, f));
    const CVector rhs = sg.poisson(s + t, f);
    EXPECT_LE(oracle::rel_err(lhs, rhs), 1e-6);
  }
}

TEST_P(BothBackends, SquareRootAndInverse) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 6);
  const Semigroup sg(c.op, with(GetParam()));
  std::mt19937_64 rng(8);
  const CVector f = oracle::random_mean_zero(c.grid.node_count(), rng);
  const CVector r = sg.inverse_sqrt(f);
  EXPECT_LE(oracle::rel_err(sg.inverse_sqrt(r), sg.neg_power(1, f)), 1e-6);
  EXPECT_LE(oracle::rel_err(sg.sqrt(r), f), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(Backends, BothBackends, ::testing::Values(Backend::spectral, Backend::krylov));

TEST(HeatApply, DenseOracleAndKrylovAgree) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16));
  const Semigroup sg(c.op);
  const ScalarField f(c.grid, point_mass(c.grid, 100));
  const auto a = heat_apply(sg, 0.1, f, HeatMethod::dense_oracle);
  const auto b = heat_apply(sg, 0.1, f, HeatMethod::krylov);
  EXPECT_LE(oracle::rel_err(b.values, a.values), 1e-8);
  const ScalarField wrong(Grid::square(16, 16, 0.5));
  EXPECT_THROW(heat_apply(sg, 0.1, wrong), InvalidArgument);
}

TEST(HeatApply, FamilyMatchesSingleCalls) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16));
  for (auto b : {Backend::spectral, Backend::krylov}) {
    const Semigroup sg(c.op, with(b));
    std::mt19937_64 rng(9);
    const CVector f = oracle::random_field(c.grid.node_count(), rng);
    const std::vector<double> times{0.3, 0.001, 0.05, 0.0};
    const auto fam = sg.heat_family(times, f);
    for (std::size_t j = 0; j < times.size(); ++j) EXPECT_LE(oracle::rel_err(fam[j], sg.heat(times[j], f)), 1e-9);
  }
}

TEST(HeatApply, KrylovLongTimesOnLargeGrid) {
  const auto c = random_case(Grid::square(48, 48, 1.0 / 48));
  const Semigroup sg(c.op, with(Backend::krylov));
  std::mt19937_64 rng(10);
  const CVector f = oracle::random_field(c.grid.node_count(), rng);
  const CVector u = sg.heat(16.0, f);
  // By t = 16 every non-constant mode has decayed below roundoff.
  EXPECT_LT((u - CVector::Constant(f.size(), f.mean())).norm(), 1e-9 * f.norm());
}

TEST(HeatPower, Examples) {
  const int n = 64;
  const auto c = identity_case(Grid::line(n, 1.0 / n));
  const Semigroup sg(c.op);
  const ScalarField one = ScalarField::constant(c.grid, 1.0);
  EXPECT_LT(heat_power_apply(sg, 0.3, 1, one).values.norm(), 1e-10);
  EXPECT_THROW(heat_power_apply(sg, 0.3, 0, one), InvalidArgument);
  EXPECT_THROW(heat_power_apply(sg, 0.3, 9, one), InvalidArgument);
  EXPECT_THROW(heat_power_apply(sg, 0.0, 1, one), InvalidArgument);

  const CVector f = oracle::fourier_mode(n, 1);
  const double mu = oracle::fourier_eigenvalue(n, 1.0 / n, 1);
  const double t = 0.5, x = t * t * mu;
  const CVector ref = x * x * std::exp(-x) * f;
  const auto got = heat_power_apply(sg, t, 2, ScalarField(c.grid, f));
  EXPECT_LE((got.values - ref).norm() / f.norm(), 1e-10);
}

TEST(Resolvent, Examples) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 4);
  const Semigroup sg(c.op);
  std::mt19937_64 rng(12);
  const ScalarField f(c.grid, oracle::random_field(c.grid.node_count(), rng));
  EXPECT_EQ((resolvent_apply(sg, 0.0, f).values - f.values).norm(), 0.0);
  const ScalarField one = ScalarField::constant(c.grid, 1.0);
  EXPECT_LT((resolvent_apply(sg, 0.7, one).values - one.values).cwiseAbs().maxCoeff(), 1e-12);

  const oracle::Dense L = oracle::operator_matrix(c.grid, c.coeff);
  const oracle::Dense M = oracle::Dense::Identity(L.rows(), L.cols()) + 0.09 * L;
  const CVector ref = M.partialPivLu().solve(f.values);
  const auto got = resolvent_apply(sg, 0.3, f);
  EXPECT_LE(oracle::rel_err(got.values, ref), 1e-10);
  EXPECT_LE((M * got.values - f.values).norm() / f.values.norm(), 1e-10);
}

TEST(Resolvent, Identity) {
  const auto c = random_case(Grid::square(16, 16, 1.0 / 16), 4);
  const Semigroup sg(c.op);
  std::mt19937_64 rng(13);
  const CVector f = oracle::random_field(c.grid.node_count(), rng);
  for (auto [t, s] : {std::pair{0.05, 0.2}, {0.3, 0.1}, {1.0, 0.02}}) {
    const CVector lhs = sg.resolvent(t * t, f) - sg.resolvent(s * s, f);
    const CVector rhs = (s * s - t * t) * sg.resolvent(t * t, sg.apply(sg.resolvent(s * s, f)));
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * std::max(lhs.norm(), 1e-3 * f.norm()));
  }
}

TEST(NegPower, InvertsOperator) {
  for (auto b : {Boundary::periodic, Boundary::dirichlet}) {
    const auto c = random_case(Grid({16, 16}, 1.0 / 16, b), 5);
    const Semigroup sg(c.op);
    std::mt19937_64 rng(14);
    const CVector f = oracle::random_mean_zero(c.grid.node_count(), rng);
    EXPECT_LE(oracle::rel_err(sg.neg_power(1, sg.apply(f)), f), 1e-10);
  }
}

TEST(NegPower, KernelComponentRejected) {
  const auto c = identity_case(Grid::line(32, 1.0 / 32));
  const Semigroup sg(c.op);
  const ScalarField one = ScalarField::constant(c.grid, 1.0);
  try {
    neg_power_apply(sg, 1, one);
    FAIL() << "expected KernelComponent";
  } catch (const KernelComponent& e) {
    EXPECT_NE(std::string(e.what()).find("kernel component"), std::string::npos);
  }
  EXPECT_THROW(neg_power_apply(sg, 0, one), InvalidArgument);
}

TEST(NegPower, DirichletMatchesDenseSolve) {
  const auto c = identity_case(Grid::line(32, 1.0 / 32, Boundary::dirichlet));
  const Semigroup sg(c.op);
  std::mt19937_64 rng(15);
  const CVector f = oracle::random_field(32, rng);
  const oracle::Dense L = oracle::operator_matrix(c.grid, c.coeff);
  const auto lu = L.partialPivLu();
  const CVector ref = lu.solve(CVector(lu.solve(f)));
  EXPECT_LE(oracle::rel_err(neg_power_apply(sg, 2, ScalarField(c.grid, f)).values, ref), 1e-10);
}

TEST(NegPower, PeriodicMatchesPseudoInverse) {
  const auto c = random_case(Grid::square(12, 12, 1.0 / 12), 7);
  const Semigroup sg(c.op);
  std::mt19937_64 rng(16);
  const CVector f = oracle::random_mean_zero(c.grid.node_count(), rng);
  // Solve on the mean-zero subspace by bordering with the constant vector.
  const oracle::Dense L = oracle::operator_matrix(c.grid, c.coeff);
  const Index n = L.rows();
  oracle::Dense B = oracle::Dense::Zero(n + 1, n + 1);
  B.topLeftCorner(n, n) = L;
  B.block(0, n, n, 1).setOnes();
  B.block(n, 0, 1, n).setOnes();
  CVector rhs = CVector::Zero(n + 1);
  rhs.head(n) = f;
  const CVector x1 = B.partialPivLu().solve(rhs).head(n);
  rhs.head(n) = x1;
  const CVector x2 = B.partialPivLu().solve(rhs).head(n);
  EXPECT_LE(oracle::rel_err(sg.neg_power(2, f), x2), 1e-10);
}
