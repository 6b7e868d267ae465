#pragma once

#include <vector>

#include "hardy/operator.hpp"

namespace hardy {

/// A linear combination sum_k weight_k e^{-time_k L} + kernel_weight * P_0,
/// where P_0 projects onto the kernel of L. Quadrature rules for operator
/// functions built from the heat semigroup are expressed in this form.
struct HeatQuadrature {
  std::vector<double> times;
  std::vector<double> weights;
  double kernel_weight = 0.0;

  /// Scalar symbol of the rule at an eigenvalue mu (mu == 0 marks the kernel).
  Complex symbol(Complex mu, bool kernel_mode) const;
};

/// e^{-t sqrt L} = pi^{-1/2} int_0^inf u^{-1/2} e^{-u} e^{-t^2 L / (4u)} du,
/// integrated by the trapezoid rule in v = log u over
/// [log(t^2 low / 160), log(40 + t sqrt(high))]. The mass lost in the left tail
/// only matters on the kernel and is restored there exactly.
HeatQuadrature subordination_rule(double t, const SpectralBounds& bounds, int nodes);

/// L^{-1/2} = pi^{-1/2} int_0^inf e^{-sL} ds / sqrt(s), with the double
/// exponential substitution s = exp(v - e^{-v}) / high, v in [-4.5, log(40 high / low) + 0.5].
HeatQuadrature inverse_sqrt_rule(const SpectralBounds& bounds, int nodes);

}  // namespace hardy
