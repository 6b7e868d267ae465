#include "oracle/dense.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

Dense gradient_matrix(const hardy::Grid& g) {
  const int d = g.dim();
  const double h = g.spacing();
  const Index cells = g.cell_count();
  Dense G = Dense::Zero(cells * d, g.node_count());
  for (Index c = 0; c < cells; ++c) {
    const auto lo = g.cell_corner(c);
    for (int k = 0; k < d; ++k) {
      auto hi = lo;
      hi[k] += 1;
      const Index a = g.wrap_index(lo);
      const Index b = g.wrap_index(hi);
      if (b >= 0) G(c * d + k, b) += 1.0 / h;
      if (a >= 0) G(c * d + k, a) -= 1.0 / h;
    }
  }
  return G;
}

Dense operator_matrix(const hardy::Grid& g, const hardy::CoefficientField& a) {
  const int d = g.dim();
  const Dense G = gradient_matrix(g);
  Dense A = Dense::Zero(G.rows(), G.rows());
  for (Index c = 0; c < g.cell_count(); ++c)
    A.block(c * d, c * d, d, d) = a.at(c).topLeftCorner(d, d);
  return G.adjoint() * A * G;
}

Dense circulant_laplacian(int n, double h) {
  Dense M = Dense::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    M(i, i) = 2.0 / (h * h);
    M(i, (i + 1) % n) = -1.0 / (h * h);
    M(i, (i + n - 1) % n) = -1.0 / (h * h);
  }
  return M;
}

double fourier_eigenvalue(int n, double h, int k) {
  const double s = 2.0 / h * std::sin(std::numbers::pi * k / n);
  return s * s;
}

CVector fourier_mode(int n, int k) {
  CVector v(n);
  for (int j = 0; j < n; ++j) v[j] = std::polar(1.0, 2.0 * std::numbers::pi * k * j / n);
  return v;
}

CVector expm_apply(const Dense& M, double t, const CVector& f) {
  const Dense E = (M * Complex(-t)).exp();
  return E * f;
}

CVector random_field(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(nd(rng), nd(rng));
  return v;
}

CVector random_mean_zero(Index n, std::mt19937_64& rng) {
  CVector v = random_field(n, rng);
  return v - CVector::Constant(n, v.mean());
}

double rel_err(const CVector& a, const CVector& b) { return (a - b).norm() / b.norm(); }

}  // namespace oracle
