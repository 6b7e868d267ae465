#pragma once

#include <cstdint>
#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

using CMatrix2 = Eigen::Matrix2cd;

/// Per-cell complex coefficient matrix A(x) of L = -div(A grad).
/// Only the leading dim x dim block of each matrix is meaningful.
class CoefficientField {
 public:
  CoefficientField() = default;
  /// Validates ellipticity; throws InvalidArgument if the field is degenerate.
  CoefficientField(Grid grid, std::vector<CMatrix2> matrices);

  static CoefficientField constant(const Grid& grid, const CMatrix2& a);
  static CoefficientField identity(const Grid& grid);

  const Grid& grid() const { return grid_; }
  const std::vector<CMatrix2>& matrices() const { return matrices_; }
  const CMatrix2& at(Index cell) const { return matrices_[cell]; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  /// True when every cell matrix equals its conjugate transpose exactly.
  bool hermitian() const { return hermitian_; }

 private:
  Grid grid_;
  std::vector<CMatrix2> matrices_;
  double lambda_ = 0.0;
  double Lambda_ = 0.0;
  bool hermitian_ = false;
};

struct EllipticityConstants {
  double lambda;  // min over cells of the smallest eigenvalue of Re A = (A + A^*)/2
  double Lambda;  // max over cells of the spectral norm of A
};

/// Measures (lambda, Lambda). Throws InvalidArgument when lambda <= 0.
EllipticityConstants check_ellipticity(const Grid& grid, const std::vector<CMatrix2>& matrices);
EllipticityConstants check_ellipticity(const CoefficientField& coeff);

/// Random per-cell coefficients with measured constants inside [lambda, Lambda].
/// Deterministic for a fixed seed. lambda == Lambda forces A = lambda I.
CoefficientField random_elliptic_coefficients(const Grid& grid, double lambda, double Lambda, std::uint64_t seed);

}  // namespace hardy
