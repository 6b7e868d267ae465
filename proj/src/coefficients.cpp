#include "hardy/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "hardy/error.hpp"

namespace hardy {
namespace {

EllipticityConstants cell_constants(const CMatrix2& a, int dim) {
  if (dim == 1) return {a(0, 0).real(), std::abs(a(0, 0))};
  const CMatrix2 herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix2> es(herm, Eigen::EigenvaluesOnly);
  Eigen::JacobiSVD<CMatrix2> svd(a);
  return {es.eigenvalues()(0), svd.singularValues()(0)};
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

EllipticityConstants check_ellipticity(const Grid& grid, const std::vector<CMatrix2>& matrices) {
  if (static_cast<Index>(matrices.size()) != grid.cell_count())
    throw InvalidArgument("coefficient field: cell count does not match grid");
  EllipticityConstants out{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& a : matrices) {
    const auto c = cell_constants(a, grid.dim());
    out.lambda = std::min(out.lambda, c.lambda);
    out.Lambda = std::max(out.Lambda, c.Lambda);
  }
  if (!(out.lambda > 0.0)) throw InvalidArgument("coefficients are not elliptic: measured lambda <= 0");
  return out;
}

EllipticityConstants check_ellipticity(const CoefficientField& coeff) {
  return check_ellipticity(coeff.grid(), coeff.matrices());
}

CoefficientField::CoefficientField(Grid grid, std::vector<CMatrix2> matrices)
    : grid_(std::move(grid)), matrices_(std::move(matrices)) {
  if (grid_.dim() == 1) {
    for (auto& a : matrices_) {
      const Complex a00 = a(0, 0);
      a.setZero();
      a(0, 0) = a00;
    }
  }
  const auto c = check_ellipticity(grid_, matrices_);
  lambda_ = c.lambda;
  Lambda_ = c.Lambda;
  hermitian_ = std::all_of(matrices_.begin(), matrices_.end(),
                           [](const CMatrix2& a) { return a == CMatrix2(a.adjoint()); });
}

CoefficientField CoefficientField::constant(const Grid& grid, const CMatrix2& a) {
  return CoefficientField(grid, std::vector<CMatrix2>(grid.cell_count(), a));
}

CoefficientField CoefficientField::identity(const Grid& grid) {
  return constant(grid, CMatrix2::Identity());
}

CoefficientField random_elliptic_coefficients(const Grid& grid, double lambda, double Lambda, std::uint64_t seed) {
  if (!(lambda > 0.0) || lambda > Lambda) throw InvalidArgument("need 0 < lambda <= Lambda");
  std::mt19937_64 rng(seed);
  const Complex I(0.0, 1.0);
  std::vector<CMatrix2> cells(grid.cell_count());
  for (auto& a : cells) {
    // Hermitian part U diag(d) U^* with d in [lambda, (lambda + Lambda)/2], plus a
    // skew-Hermitian part of norm at most Lambda - max(d). Then Re A >= lambda and
    // |A| <= Lambda.
    // A margin keeps the measured constants strictly inside [lambda, Lambda]
    // after the rounding of the eigen/SVD computations.
    const double margin = 1e-9 * Lambda;
    const double lo = lambda + margin;
    const double mid = std::max(lo, 0.5 * (lambda + Lambda));
    const double d0 = lo + (mid - lo) * uniform01(rng);
    const double d1 = lo + (mid - lo) * uniform01(rng);
    const double r = std::max(0.0, Lambda - margin - std::max(d0, d1));
    const double s0 = r * (2.0 * uniform01(rng) - 1.0);
    const double s1 = r * (2.0 * uniform01(rng) - 1.0);
    const double th = std::numbers::pi * uniform01(rng);
    const double ph = 2.0 * std::numbers::pi * uniform01(rng);
    const double th2 = std::numbers::pi * uniform01(rng);
    const double ph2 = 2.0 * std::numbers::pi * uniform01(rng);
    auto unitary = [&](double t, double p) {
      CMatrix2 u;
      u << std::cos(t), -std::exp(I * p) * std::sin(t), std::exp(-I * p) * std::sin(t), std::cos(t);
      return u;
    };
    if (grid.dim() == 1) {
      a.setZero();
      a(0, 0) = Complex(d0, s0);
      continue;
    }
    const CMatrix2 u = unitary(th, ph);
    const CMatrix2 v = unitary(th2, ph2);
    const CMatrix2 herm = u * Eigen::Vector2cd(d0, d1).asDiagonal() * u.adjoint();
    const CMatrix2 skew = I * (v * Eigen::Vector2cd(s0, s1).asDiagonal() * v.adjoint());
    a = herm + skew;
  }
  if (Lambda - lambda <= 2e-9 * Lambda) {
    for (auto& a : cells) a = lambda * CMatrix2::Identity();
  }
  return CoefficientField(grid, std::move(cells));
}

}  // namespace hardy
