#include "oracle/brute.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

DenseCalculus::DenseCalculus(const hardy::Grid& g, const hardy::CoefficientField& a)
    : grid(g), L(operator_matrix(g, a)) {
  const Index n = g.node_count();
  P = Dense::Zero(n, n);
  if (g.periodic()) P.setConstant(1.0 / static_cast<double>(n));
  // L and P commute with LP = PL = 0, so sqrt(L + P) = sqrt(L) + P.
  const Dense shifted = L + P;
  root = Dense(shifted.sqrt()) - P;
}

CVector DenseCalculus::heat(double s, const CVector& f) const { return expm_apply(L, s, f); }

CVector DenseCalculus::poisson(double t, const CVector& f) const { return expm_apply(root, t, f); }

std::vector<CVector> DenseCalculus::grad(const CVector& u) const {
  const Dense G = gradient_matrix(grid);
  const CVector all = G * u;
  const int d = grid.dim();
  // gradient_matrix rows are per cell; on periodic grids cell c sits at node c.
  std::vector<CVector> out(d, CVector::Zero(grid.node_count()));
  for (Index c = 0; c < grid.cell_count(); ++c) {
    const auto corner = grid.cell_corner(c);
    const Index node = grid.wrap_index(corner);
    if (node < 0) continue;
    bool inside = true;
    for (int k = 0; k < d; ++k) inside = inside && corner[k] >= 0;
    if (!inside) continue;
    for (int k = 0; k < d; ++k) out[k][node] = all[c * d + k];
  }
  return out;
}

Eigen::VectorXd cone_sum(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag, double alpha,
                         double t_lower, double t_upper) {
  const Index N = g.node_count();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
  for (Index x = 0; x < N; ++x) {
    double s = 0.0;
    for (int j = 0; j < tg.count(); ++j) {
      const double t = tg[j];
      if (!(t > t_lower && t < t_upper)) continue;
      const double w = g.cell_volume() * tg.weights()[j] / std::pow(t, g.dim());
      for (Index y = 0; y < N; ++y)
        if (g.distance2(x, y) < (alpha * t) * (alpha * t)) s += w * mag(y, j);
    }
    out[x] = std::sqrt(s);
  }
  return out;
}

namespace {

double ball_mean(const hardy::Grid& g, const Mag& mag, int j, Index y, double r) {
  double s = 0.0;
  int count = 0;
  for (Index z = 0; z < g.node_count(); ++z)
    if (g.distance2(y, z) < r * r) {
      s += mag(z, j);
      ++count;
    }
  return s / count;
}

}  // namespace

Eigen::VectorXd cone_max(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag, double alpha, double rho) {
  const Index N = g.node_count();
  Eigen::VectorXd out(N);
  for (Index x = 0; x < N; ++x) {
    double best = 0.0;
    for (int j = 0; j < tg.count(); ++j)
      for (Index y = 0; y < N; ++y)
        if (g.distance2(x, y) < (alpha * tg[j]) * (alpha * tg[j]))
          best = std::max(best, ball_mean(g, mag, j, y, rho * tg[j]));
    out[x] = std::sqrt(best);
  }
  return out;
}

Eigen::VectorXd star_max(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag) {
  Eigen::VectorXd out(g.node_count());
  for (Index x = 0; x < g.node_count(); ++x) {
    double best = 0.0;
    for (int j = 0; j < tg.count(); ++j) best = std::max(best, ball_mean(g, mag, j, x, tg[j]));
    out[x] = std::sqrt(best);
  }
  return out;
}

Eigen::VectorXd hl_max(const hardy::Grid& g, const CVector& f) {
  const Index N = g.node_count();
  Eigen::VectorXd out(N);
  for (Index x = 0; x < N; ++x) {
    double best = 0.0;
    for (Index z = 0; z < N; ++z) {
      const double r2 = g.distance2(x, z);
      double s = 0.0;
      int count = 0;
      for (Index y = 0; y < N; ++y)
        if (g.distance2(x, y) <= r2) {
          s += std::abs(f[y]);
          ++count;
        }
      best = std::max(best, s / count);
    }
    out[x] = best;
  }
  return out;
}

}  // namespace oracle
