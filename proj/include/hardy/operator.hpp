#pragma once

#include <Eigen/Sparse>

#include "hardy/coefficients.hpp"
#include "hardy/grid.hpp"

namespace hardy {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Bounds on the nonzero spectrum of L: every nonzero eigenvalue mu has
/// Re mu >= low and |mu| <= high.
struct SpectralBounds {
  double low;
  double high;
};

/// L = -div_h(A grad_h) assembled in flux form, L = G^* diag(A) G, where G is the
/// forward-difference gradient from nodes to cells. Immutable.
class DiscreteOperator {
 public:
  DiscreteOperator() = default;
  DiscreteOperator(Grid grid, SparseMatrix matrix, double lambda, double Lambda);

  const Grid& grid() const { return grid_; }
  const SparseMatrix& matrix() const { return matrix_; }
  const SparseMatrix& adjoint_matrix() const { return adjoint_; }
  int kernel_dim() const { return grid_.periodic() ? 1 : 0; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  bool hermitian() const { return hermitian_; }

  /// The operator L^* (matrix and adjoint swapped).
  DiscreteOperator adjoint() const;

  CVector apply(const CVector& u) const { return matrix_ * u; }
  ScalarField apply(const ScalarField& u) const;

  SpectralBounds spectral_bounds() const;

 private:
  Grid grid_;
  SparseMatrix matrix_;
  SparseMatrix adjoint_;
  double lambda_ = 0.0;
  double Lambda_ = 0.0;
  bool hermitian_ = false;
};

/// Throws InvalidArgument on grid mismatch or non-elliptic coefficients.
DiscreteOperator assemble_operator(const Grid& grid, const CoefficientField& coeff);

/// Forward differences (u(x + h e_k) - u(x)) / h at every node; wraps on
/// periodic grids and reads zero outside Dirichlet grids.
VectorField discrete_gradient(const ScalarField& u);

/// Smallest nonzero eigenvalue of the discrete Laplacian G^* G on this grid.
double laplacian_gap(const Grid& grid);

}  // namespace hardy
