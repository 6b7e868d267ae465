#pragma once

#include <limits>
#include <string>
#include <vector>

#include "hardy/semigroup.hpp"
#include "hardy/time_grid.hpp"

namespace hardy {

/// Cone Gamma^alpha(x) = {(y, t) : |x - y| < alpha t}, restricted to
/// t_lower < t < t_upper. The defaults keep every sample of the time grid.
struct ConeSpec {
  double aperture = 1.0;
  double t_lower = 0.0;
  double t_upper = std::numeric_limits<double>::infinity();

  void validate() const;
};

/// F(y, t_j) sampled on grid x time grid. Vector-valued integrands (gradients)
/// carry one matrix per component; |F|^2 sums over components.
struct SpaceTimeField {
  Grid grid;
  TimeGrid times;
  std::string integrand_tag;
  std::vector<Eigen::MatrixXcd> components;  // each node_count x times.count()

  SpaceTimeField() = default;
  SpaceTimeField(Grid g, TimeGrid t, std::string tag, int ncomp = 1);

  /// |F(y, t_j)|^2 as a node_count x count matrix.
  Eigen::MatrixXd magnitude2() const;
};

enum class SquareKind { heat, heat_K, poisson_grad, poisson_K, poisson_tderiv, poisson_full_grad };
enum class VerticalKind { g_h, g_h_M, g_P, g_P_bar, g_P_aux };
enum class MaximalKind { heat, heat_beta, heat_star, heat_star_M, poisson, poisson_star };

std::string to_string(SquareKind k);
std::string to_string(VerticalKind k);
std::string to_string(MaximalKind k);
SquareKind square_kind_from_string(const std::string& s);
VerticalKind vertical_kind_from_string(const std::string& s);
MaximalKind maximal_kind_from_string(const std::string& s);

/// Integrands. K (or M) is the power for the *_K / *_M kinds and ignored otherwise.
SpaceTimeField square_integrand(const Semigroup& sg, const ScalarField& f, SquareKind kind, int K, const TimeGrid& times);
SpaceTimeField vertical_integrand(const Semigroup& sg, const ScalarField& f, VerticalKind kind, int M,
                                  const TimeGrid& times);
SpaceTimeField maximal_integrand(const Semigroup& sg, const ScalarField& f, MaximalKind kind, int M,
                                 const TimeGrid& times);

/// (sum over cone cells of h^n w_j t_j^{-n} |F(y, t_j)|^2)^{1/2} at every node x,
/// w_j the log-time trapezoid weights.
ScalarField cone_integrate(const SpaceTimeField& F, const ConeSpec& cone);
/// (sum_j w_j |F(x, t_j)|^2)^{1/2}.
ScalarField vertical_integrate(const SpaceTimeField& F);
/// sup over (y, t_j) with |x - y| < aperture t_j of the mean of |F(., t_j)|^2
/// over the open lattice ball B(y, radius_factor t_j), square-rooted.
ScalarField cone_maximal(const SpaceTimeField& F, double aperture, double radius_factor);
/// sup over t_j of the root mean of |F(., t_j)|^2 over B(x, t_j).
ScalarField star_maximal(const SpaceTimeField& F);

ScalarField square_function(const Semigroup& sg, const ScalarField& f, const ConeSpec& cone, SquareKind kind, int K,
                            const TimeGrid& times);
ScalarField vertical_square_function(const Semigroup& sg, const ScalarField& f, VerticalKind kind, int M,
                                     const TimeGrid& times);
/// Cone kinds use aperture beta; heat and poisson average over B(y, t),
/// heat_beta over B(y, beta t). Star kinds ignore beta.
ScalarField nontangential_max(const Semigroup& sg, const ScalarField& f, MaximalKind kind, double beta, int M,
                              const TimeGrid& times);

/// Sup over closed lattice balls B(x, r), every distinct lattice radius r >= 0,
/// of the mean of |f|.
ScalarField hl_maximal(const ScalarField& f);

struct ApertureReport {
  double wide_norm;  // ||S^alpha F||_1
  double unit_norm;  // ||S^1 F||_1
  double ratio;      // 1 when both vanish
};
ApertureReport aperture_compare(const SpaceTimeField& F, double alpha);

/// Lattice offsets sorted by physical distance: every node y is reached from
/// any x exactly once as wrap(x + offset) (-1 outside Dirichlet grids).
struct OffsetTable {
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> dist2;  // nondecreasing

  explicit OffsetTable(const Grid& g);
  /// Number of leading offsets with dist2 < r2.
  std::size_t count_below(double r2) const;
};

/// Real part of a ScalarField functional as a plain vector.
Eigen::VectorXd real_values(const ScalarField& f);

}  // namespace hardy
