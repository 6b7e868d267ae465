#pragma once

// Exhaustive reference versions of the cone sums and maximal functions and
// dense semigroup values. O(N^2 T) or worse; only for small grids.

#include <vector>

#include "hardy/time_grid.hpp"
#include "oracle/dense.hpp"

namespace oracle {

/// Dense operator functions of L built from Eigen matrix functions.
struct DenseCalculus {
  hardy::Grid grid;
  Dense L;
  Dense P;  // projector onto the kernel (constants on periodic grids)
  Dense root;  // L^{1/2}

  DenseCalculus(const hardy::Grid& g, const hardy::CoefficientField& a);
  CVector heat(double s, const CVector& f) const;
  CVector poisson(double t, const CVector& f) const;
  CVector sqrt(const CVector& f) const { return root * f; }
  /// Forward-difference gradient components.
  std::vector<CVector> grad(const CVector& u) const;
};

/// |F|^2 per node (rows) and time sample (columns).
using Mag = Eigen::MatrixXd;

/// Direct triple sum over (x, y, t_j).
Eigen::VectorXd cone_sum(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag, double alpha,
                         double t_lower = 0.0, double t_upper = 1e300);
/// Direct sup over (y, t_j) in the cone of ball means over B(y, rho t_j).
Eigen::VectorXd cone_max(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag, double alpha, double rho);
Eigen::VectorXd star_max(const hardy::Grid& g, const hardy::TimeGrid& tg, const Mag& mag);
/// Sup over every closed ball B(x, |x - z|) of the mean of |f|.
Eigen::VectorXd hl_max(const hardy::Grid& g, const CVector& f);

}  // namespace oracle
