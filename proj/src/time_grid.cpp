#include "hardy/time_grid.hpp"

#include <cmath>

#include "hardy/error.hpp"

namespace hardy {

TimeGrid::TimeGrid(double t_min, double t_max, int count) : t_min_(t_min), t_max_(t_max), count_(count) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw InvalidArgument("time grid needs 0 < t_min < t_max");
  if (count < 16) throw InvalidArgument("time grid needs at least 16 samples");
  log_step_ = std::log(t_max / t_min) / (count - 1);
  samples_.resize(count);
  weights_.assign(count, log_step_);
  for (int j = 0; j < count; ++j) samples_[j] = t_min * std::exp(j * log_step_);
  samples_.back() = t_max;
  // Endpoint-corrected trapezoid rule, fourth order for smooth integrands.
  constexpr double ends[] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < 3; ++k) {
    weights_[k] *= ends[k];
    weights_[count - 1 - k] *= ends[k];
  }
}

TimeGrid TimeGrid::standard(const Grid& grid, int count) {
  return TimeGrid(grid.spacing() / 4.0, 4.0 * grid.extent(), count);
}

TimeGrid TimeGrid::resolving(const Grid& grid, int count) {
  return TimeGrid(grid.spacing() / 64.0, 4.0 * grid.extent(), count);
}

}  // namespace hardy
