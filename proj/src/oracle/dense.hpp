#pragma once

// Dense, loop-level reference computations. Nothing here calls into the
// library's assembly or solvers; only the Grid/CoefficientField containers
// are shared.

#include <random>

#include <Eigen/Dense>

#include "hardy/coefficients.hpp"
#include "hardy/grid.hpp"

namespace oracle {

using hardy::Complex;
using hardy::CVector;
using hardy::Index;
using Dense = Eigen::MatrixXcd;

/// Dense forward-difference gradient, rows ordered (cell, component).
Dense gradient_matrix(const hardy::Grid& g);
/// G^* diag(A) G assembled densely from gradient_matrix.
Dense operator_matrix(const hardy::Grid& g, const hardy::CoefficientField& a);

/// Symmetric second-difference circulant / h^2.
Dense circulant_laplacian(int n, double h);

/// Eigenvalue of the 1D periodic discrete Laplacian for Fourier index k.
double fourier_eigenvalue(int n, double h, int k);
/// exp(2 pi i k x_j) sampled at the nodes of a 1D periodic grid.
CVector fourier_mode(int n, int k);

/// Padé matrix exponential of -t M applied to f (Eigen MatrixFunctions).
CVector expm_apply(const Dense& M, double t, const CVector& f);

CVector random_field(Index n, std::mt19937_64& rng);
CVector random_mean_zero(Index n, std::mt19937_64& rng);

/// ||a - b|| / ||b||.
double rel_err(const CVector& a, const CVector& b);

}  // namespace oracle
