#pragma once

#include <vector>

#include <Eigen/Dense>

#include "hardy/grid.hpp"

namespace hardy {

/// Log-uniform samples t_j = t_min (t_max / t_min)^{j / (count - 1)}.
///
/// weights() integrate dt/t in log t with the endpoint-corrected trapezoid
/// rule (3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8) times the log step;
/// every t-integral in the library uses them.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double t_min, double t_max, int count);

  /// t_min = h/4, t_max = 4 * (domain side): the resolvable window.
  static TimeGrid standard(const Grid& grid, int count = 64);
  /// t_min = h/64: (t^2 mu)^3 at the top of the spectrum drops below 1e-8, so
  /// reproducing formulas close to quadrature accuracy.
  static TimeGrid resolving(const Grid& grid, int count = 64);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  int count() const { return count_; }
  double log_step() const { return log_step_; }
  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](int j) const { return samples_[j]; }

  bool operator==(const TimeGrid& o) const {
    return t_min_ == o.t_min_ && t_max_ == o.t_max_ && count_ == o.count_;
  }

 private:
  double t_min_ = 0.0;
  double t_max_ = 0.0;
  int count_ = 0;
  double log_step_ = 0.0;
  std::vector<double> samples_;
  std::vector<double> weights_;
};

}  // namespace hardy
