#pragma once

#include <string>
#include <vector>

#include "hardy/decomposition.hpp"

namespace hardy {

/// L^{-1/2} f = pi^{-1/2} int_0^inf e^{-sL} f ds / sqrt(s), by the
/// double-exponential rule with quad_nodes nodes on either backend.
CVector riesz_inverse_sqrt(const Semigroup& sg, const CVector& f, int quad_nodes = 64);
/// grad L^{-1/2} f. f must be free of kernel component.
VectorField riesz_apply(const Semigroup& sg, const ScalarField& f, int quad_nodes = 64);

struct RieszEntry {
  std::size_t id;
  double cube_side;
  double l1;  // || |grad L^{-1/2} m| ||_1
};

struct RieszReport {
  std::vector<RieszEntry> entries;
  double sup = 0.0;
  double min = 0.0;
  double spread = 1.0;  // sup / min over nonzero entries
};

/// Throws InvalidArgument if a molecule does not carry a passing report.
RieszReport riesz_h1_experiment(const std::vector<Molecule>& molecules, const Semigroup& sg, int quad_nodes = 64);
/// id,cube_side,l1
std::string to_csv(const RieszReport& r);

enum class CommutatorTarget { g_h, riesz };
std::string to_string(CommutatorTarget t);
CommutatorTarget commutator_target_from_string(const std::string& s);

struct CommutatorMeasure {
  double t = 0.0;
  double dist = 0.0;
  double difference_norm = 0.0;  // ||T (I - e^{-tL})^M f||_{L2(F)}
  double power_norm = 0.0;       // ||T (tL e^{-tL})^M f||_{L2(F)}
  double scale = 0.0;            // (t / dist^2)^M
  double difference_ratio = 0.0;
  double power_ratio = 0.0;
};

/// f = normalized indicator of E. g_h integrates over `times`.
CommutatorMeasure gaffney_commutator_check(const Semigroup& sg, CommutatorTarget target, int M, double t,
                                           const std::vector<Index>& E, const std::vector<Index>& F,
                                           const TimeGrid& times, int quad_nodes = 64);

struct CommutatorSweep {
  std::vector<CommutatorMeasure> rows;
  double difference_slope = 0.0;  // log-log regression of difference_norm on t
  double power_slope = 0.0;
};
CommutatorSweep commutator_sweep(const Semigroup& sg, CommutatorTarget target, int M, const std::vector<double>& t_values,
                                 const std::vector<Index>& E, const std::vector<Index>& F, const TimeGrid& times,
                                 int quad_nodes = 64);

}  // namespace hardy
