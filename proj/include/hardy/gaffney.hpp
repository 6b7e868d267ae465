#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hardy/semigroup.hpp"
#include "hardy/time_grid.hpp"

namespace hardy {

/// e^{-tL}, tLe^{-tL}, t^{1/2} grad e^{-tL}, (1+tL)^{-1}, t^{1/2} grad (1+tL)^{-1}.
enum class GaffneyFamily { heat, t_heat_deriv, grad_heat, resolvent, grad_resolvent };

std::string to_string(GaffneyFamily f);
GaffneyFamily gaffney_family_from_string(const std::string& s);
bool is_gradient(GaffneyFamily f);

/// One member of a family applied to f. Scalar families return one
/// component, gradient families one per axis.
std::vector<CVector> apply_family(const Semigroup& sg, GaffneyFamily family, double t, const CVector& f);
/// The same for every sample of a time grid (heat families share one spectral transform).
std::vector<std::vector<CVector>> apply_family(const Semigroup& sg, GaffneyFamily family, const std::vector<double>& times,
                                               const CVector& f);

struct GaffneyFit {
  double c = 0.0;
  double beta = 0.0;
  double prefactor_slope = 0.0;  // q in log N = a + q log t - (d^2/(c t))^beta
  int points = 0;
};

/// Fits log N = a + q log t - (d^2 / (c t))^beta over the off-diagonal window
/// t in [d h, d^2/4]: beta by grid search, (a, q, c^{-beta}) by linear least
/// squares. Falls back to every positive sample when the window has fewer than
/// four. NaN fields signal a failed fit.
GaffneyFit fit_gaffney(double dist, double spacing, const std::vector<double>& t, const std::vector<double>& norms);

struct GaffneyProfile {
  std::string family_tag;
  std::vector<Index> set_E;
  std::vector<Index> set_F;
  std::vector<double> distances;                   // one per configuration
  std::vector<double> t_values;
  std::vector<std::vector<double>> measured_norms;  // [configuration][t]
  std::vector<GaffneyFit> fits;                     // one per configuration

  // Filled by offdiag_pq_profile only.
  double p = 2.0;
  double q = 2.0;
  double predicted_slope = 0.0;  // (n/q - n/p)/2
  double fitted_slope = 0.0;
};

/// Physical distance between the cell unions of two node sets (minimum image on
/// periodic grids); adjacent sets are at distance zero.
double set_distance(const Grid& g, const std::vector<Index>& E, const std::vector<Index>& F);

/// ||T_t f||_{L^2(F)} / ||f||_{L^2(E)} for f the normalized indicator of E.
/// Throws InvalidArgument unless E and F are nonempty and dist(E, F) > 0.
GaffneyProfile gaffney_profile(const Semigroup& sg, GaffneyFamily family, const std::vector<Index>& E,
                               const std::vector<Index>& F, const TimeGrid& times);

enum class PqProbe {
  indicator,  // f = normalized indicator of E
  extremal,   // Hölder-dual of the worst kernel row over F (exact for q = infinity)
};

/// ||e^{-tL} f||_{L^q(F)} / ||f||_{L^p(E)}, 1 <= p <= q <= infinity.
GaffneyProfile offdiag_pq_profile(const Semigroup& sg, double p, double q, const std::vector<Index>& E,
                                  const std::vector<Index>& F, const TimeGrid& times,
                                  PqProbe probe = PqProbe::indicator);

/// L^2 -> L^2 norm of each family member over the time grid (power iteration
/// on T^* T). Used for the uniform boundedness check.
std::vector<double> family_operator_norms(const Semigroup& sg, GaffneyFamily family, const TimeGrid& times,
                                          int iterations = 40);

/// Columns: family,dist,t,norm,fitted_c,fitted_beta.
void write_csv(std::ostream& os, const GaffneyProfile& profile);

}  // namespace hardy
