#include "hardy/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "hardy/error.hpp"

namespace hardy {

Complex HeatQuadrature::symbol(Complex mu, bool kernel_mode) const {
  Complex s = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) s += weights[k] * std::exp(-times[k] * mu);
  if (kernel_mode) s += kernel_weight;
  return s;
}

HeatQuadrature subordination_rule(double t, const SpectralBounds& bounds, int nodes) {
  if (nodes < 16) throw InvalidArgument("subordination quadrature needs at least 16 nodes");
  if (!(t > 0.0)) throw InvalidArgument("subordination quadrature needs t > 0");
  const double v_lo = std::log(t * t * bounds.low / 160.0);
  const double v_hi = std::log(40.0 + t * std::sqrt(bounds.high));
  const double dv = (v_hi - v_lo) / (nodes - 1);
  const double c = 1.0 / std::sqrt(std::numbers::pi);

  HeatQuadrature q;
  q.times.resize(nodes);
  q.weights.resize(nodes);
  double total = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double v = v_lo + k * dv;
    const double u = std::exp(v);
    const double end = (k == 0 || k == nodes - 1) ? 0.5 : 1.0;
    q.weights[k] = c * end * dv * std::exp(0.5 * v - u);
    q.times[k] = t * t / (4.0 * u);
    total += q.weights[k];
  }
  q.kernel_weight = 1.0 - total;
  return q;
}

HeatQuadrature inverse_sqrt_rule(const SpectralBounds& bounds, int nodes) {
  if (nodes < 32) throw InvalidArgument("inverse square root quadrature needs at least 32 nodes");
  const double scale = 1.0 / bounds.high;
  const double v_lo = -4.5;
  const double v_hi = std::log(40.0 * bounds.high / bounds.low) + 0.5;
  const double dv = (v_hi - v_lo) / (nodes - 1);
  const double c = 1.0 / std::sqrt(std::numbers::pi);

  HeatQuadrature q;
  q.times.resize(nodes);
  q.weights.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    const double v = v_lo + k * dv;
    const double s = scale * std::exp(v - std::exp(-v));
    q.times[k] = s;
    q.weights[k] = c * dv * std::sqrt(s) * (1.0 + std::exp(-v));
  }
  return q;
}

}  // namespace hardy
