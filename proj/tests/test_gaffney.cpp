#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "hardy/error.hpp"
#include "hardy/gaffney.hpp"
#include "oracle/dense.hpp"

using namespace hardy;

namespace {

std::vector<Index> range(Index a, Index b) {
  std::vector<Index> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

Semigroup laplacian_1d(int n) {
  const Grid g = Grid::line(n, 1.0 / n);
  return Semigroup(assemble_operator(g, CoefficientField::identity(g)));
}

constexpr GaffneyFamily kFamilies[] = {GaffneyFamily::heat, GaffneyFamily::t_heat_deriv, GaffneyFamily::grad_heat,
                                       GaffneyFamily::resolvent, GaffneyFamily::grad_resolvent};

}  // namespace

TEST(GaffneyFit, RecoversSyntheticProfile) {
  const double d = 0.25, h = 1.0 / 128;
  const TimeGrid tg(d * h / 2, d * d, 48);
  for (double beta : {0.9, 1.0, 1.15}) {
    std::vector<double> norms;
    for (double t : tg.samples()) norms.push_back(3.0 * std::pow(t, 0.75) * std::exp(-std::pow(d * d / (4.0 * t), beta)));
    const auto fit = fit_gaffney(d, h, tg.samples(), norms);
    EXPECT_NEAR(fit.beta, beta, 2e-3);
    EXPECT_NEAR(fit.c, 4.0, 0.05);
    EXPECT_NEAR(fit.prefactor_slope, 0.75, 0.02);
  }
}

TEST(Gaffney, SetDistance) {
  const Grid g = Grid::line(128, 1.0 / 128);
  EXPECT_DOUBLE_EQ(set_distance(g, range(0, 32), range(64, 96)), 32.0 / 128);
  EXPECT_DOUBLE_EQ(set_distance(g, range(0, 32), range(32, 40)), 0.0);
  EXPECT_DOUBLE_EQ(set_distance(g, range(0, 8), range(120, 126)), 2.0 / 128);
}

TEST(Gaffney, Preconditions) {
  const Semigroup sg = laplacian_1d(64);
  const TimeGrid tg(1e-4, 1.0, 16);
  const auto E = range(0, 16);
  EXPECT_THROW(gaffney_profile(sg, GaffneyFamily::heat, E, E, tg), InvalidArgument);
  EXPECT_THROW(gaffney_profile(sg, GaffneyFamily::heat, E, range(16, 32), tg), InvalidArgument);
  EXPECT_THROW(gaffney_profile(sg, GaffneyFamily::heat, {}, range(16, 32), tg), InvalidArgument);
  EXPECT_THROW(offdiag_pq_profile(sg, 2.0, 2.0, E, range(16, 32), tg), InvalidArgument);
  EXPECT_THROW(offdiag_pq_profile(sg, 3.0, 2.0, E, range(20, 32), tg), InvalidArgument);
  EXPECT_THROW(gaffney_family_from_string("nope"), InvalidArgument);
}

TEST(Gaffney, HeatMatchesDenseOracle) {
  const int n = 64;
  const Grid g = Grid::line(n, 1.0 / n);
  const auto a = CoefficientField::identity(g);
  const Semigroup sg(assemble_operator(g, a));
  const auto E = range(0, 16), F = range(32, 48);
  const TimeGrid tg(1e-3, 0.1, 16);
  const auto prof = gaffney_profile(sg, GaffneyFamily::heat, E, F, tg);
  const oracle::Dense L = oracle::operator_matrix(g, a);
  CVector f = CVector::Zero(n);
  for (Index i : E) f[i] = 1.0 / std::sqrt(16.0 / n);
  for (int j = 0; j < tg.count(); ++j) {
    const CVector u = oracle::expm_apply(L, tg[j], f);
    double s = 0.0;
    for (Index i : F) s += std::norm(u[i]) / n;
    EXPECT_NEAR(prof.measured_norms[0][j], std::sqrt(s), 1e-10 + 1e-8 * std::sqrt(s));
  }
}

TEST(Gaffney, HeatDecayExponentNearOne) {
  const int n = 128;
  const Semigroup sg = laplacian_1d(n);
  const auto E = range(0, 32), F = range(64, 96);
  const double d = 32.0 / n;
  const TimeGrid tg(d * d / 64, 1.0, 64);
  const auto prof = gaffney_profile(sg, GaffneyFamily::heat, E, F, tg);
  EXPECT_GE(prof.fits[0].beta, 0.8);
  EXPECT_LE(prof.fits[0].beta, 1.2);
  RecordProperty("fitted_beta", std::to_string(prof.fits[0].beta));
  RecordProperty("fitted_c", std::to_string(prof.fits[0].c));
}

TEST(Gaffney, MonotoneDecayAsTimeShrinks) {
  const int n = 128;
  const Semigroup sg = laplacian_1d(n);
  const auto E = range(0, 32), F = range(64, 96);
  const double d = 32.0 / n;
  const TimeGrid tg(d * d / 64, 10 * d * d / 64, 16);
  for (auto fam : kFamilies) {
    const auto prof = gaffney_profile(sg, fam, E, F, tg);
    const auto& N = prof.measured_norms[0];
    for (int j = 1; j < tg.count(); ++j) EXPECT_GT(N[j], N[j - 1]) << to_string(fam) << " j=" << j;
    EXPECT_GT(N.front(), 0.0);
  }
}

TEST(Gaffney, RandomCoefficientsAlsoDecay) {
  const Grid g = Grid::square(16, 16, 1.0 / 16);
  const Semigroup sg(assemble_operator(g, random_elliptic_coefficients(g, 0.5, 2.0, 1)));
  std::vector<Index> E, F;
  for (Index v = 0; v < g.node_count(); ++v) {
    const auto c = g.coords(v);
    if (c[0] < 4 && c[1] < 4) E.push_back(v);
    if (c[0] >= 8 && c[0] < 12 && c[1] >= 8 && c[1] < 12) F.push_back(v);
  }
  const double d = set_distance(g, E, F);
  const TimeGrid tg(d * d / 40, 10 * d * d / 40, 16);
  for (auto fam : kFamilies) {
    const auto N = gaffney_profile(sg, fam, E, F, tg).measured_norms[0];
    for (int j = 1; j < 5; ++j) EXPECT_GT(N[j], N[j - 1]) << to_string(fam);
  }
}

TEST(OffDiagPq, TwoTwoReducesToHeatProfile) {
  const Semigroup sg = laplacian_1d(64);
  const auto E = range(0, 16), F = range(32, 48);
  const TimeGrid tg(1e-4, 1.0, 24);
  const auto a = gaffney_profile(sg, GaffneyFamily::heat, E, F, tg);
  const auto b = offdiag_pq_profile(sg, 2.0, 2.0, E, F, tg);
  for (int j = 0; j < tg.count(); ++j) EXPECT_NEAR(a.measured_norms[0][j], b.measured_norms[0][j], 1e-14);
  EXPECT_DOUBLE_EQ(b.predicted_slope, 0.0);
}

TEST(OffDiagPq, PrefactorSlopeTwoToInfinity) {
  const int n = 256;
  const Semigroup sg = laplacian_1d(n);
  const auto E = range(0, 96), F = range(100, 196);
  const double h = 1.0 / n;
  const TimeGrid tg(h * h / 4, 1.0, 64);
  const auto prof = offdiag_pq_profile(sg, 2.0, INFINITY, E, F, tg, PqProbe::extremal);
  EXPECT_DOUBLE_EQ(prof.predicted_slope, -0.25);
  EXPECT_NEAR(prof.fitted_slope, -0.25, 0.15);
  RecordProperty("fitted_slope", std::to_string(prof.fitted_slope));
}

TEST(OffDiagPq, ExtremalProbeIsOperatorNormForSupNorm) {
  // For q = infinity the extremal value equals the largest row norm of the dense kernel.
  const int n = 32;
  const Grid g = Grid::line(n, 1.0 / n);
  const auto a = random_elliptic_coefficients(g, 0.5, 2.0, 3);
  const Semigroup sg(assemble_operator(g, a));
  const auto E = range(0, 8), F = range(12, 20);
  const TimeGrid tg(1e-3, 0.1, 16);
  const oracle::Dense L = oracle::operator_matrix(g, a);
  for (double p : {1.0, 2.0, 4.0}) {
    const auto prof = offdiag_pq_profile(sg, p, INFINITY, E, F, tg, PqProbe::extremal);
    const double pd = p == 1.0 ? INFINITY : p / (p - 1.0);
    for (int j = 0; j < tg.count(); j += 5) {
      const oracle::Dense K = (L * Complex(-tg[j])).exp();
      double best = 0.0;
      for (Index x : F) {
        CVector row(E.size());
        for (std::size_t i = 0; i < E.size(); ++i) row[i] = K(x, E[i]) * double(n);
        const double v = std::isinf(pd) ? row.cwiseAbs().maxCoeff()
                                        : std::pow(row.cwiseAbs().array().pow(pd).sum() / n, 1.0 / pd);
        best = std::max(best, v);
      }
      EXPECT_NEAR(prof.measured_norms[0][j], best, 1e-9 * best) << "p=" << p;
    }
  }
}

TEST(UniformBoundedness, NoGrowthAcrossFourDecades) {
  // Four decades inside the resolvable band [1 / mu_max, 1 / mu_min] ~ [5e-7, 5e-2].
  const Grid g = Grid::line(512, 1.0 / 512);
  const Semigroup sg(assemble_operator(g, random_elliptic_coefficients(g, 0.5, 2.0, 1)));
  const TimeGrid tg(1e-6, 1e-2, 17);
  for (auto fam : kFamilies) {
    const auto norms = family_operator_norms(sg, fam, tg, 30);
    const double mx = *std::max_element(norms.begin(), norms.end());
    const double mn = *std::min_element(norms.begin(), norms.end());
    EXPECT_LT(mx, 3.0) << to_string(fam);
    EXPECT_LT(mx / mn, 10.0) << to_string(fam);
  }
}

TEST(Gaffney, CsvExport) {
  const Semigroup sg = laplacian_1d(64);
  const auto prof = gaffney_profile(sg, GaffneyFamily::resolvent, range(0, 8), range(32, 40), TimeGrid(1e-3, 1.0, 16));
  std::ostringstream os;
  write_csv(os, prof);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "family,dist,t,norm,fitted_c,fitted_beta");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 17);
}
