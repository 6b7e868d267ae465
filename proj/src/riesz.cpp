#include "hardy/riesz.hpp"

#include <cmath>
#include <sstream>

#include "hardy/error.hpp"
#include "hardy/gaffney.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

namespace {

double magnitude_l2_on(const Eigen::VectorXd& mag, const Grid& g, const std::vector<Index>& nodes) {
  double s = 0.0;
  for (Index x : nodes) s += mag[x] * mag[x];
  return std::sqrt(s * g.cell_volume());
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

CVector riesz_inverse_sqrt(const Semigroup& sg, const CVector& f, int quad_nodes) {
  const CVector g = sg.require_range(f);
  const CVector u = sg.apply_rule(inverse_sqrt_rule(sg.bounds(), quad_nodes), g);
  if (!u.allFinite()) throw NumericalError("inverse square root quadrature produced non-finite values");
  return u;
}

VectorField riesz_apply(const Semigroup& sg, const ScalarField& f, int quad_nodes) {
  require_same_grid(sg.grid(), f.grid, "riesz_apply");
  return discrete_gradient(ScalarField(f.grid, riesz_inverse_sqrt(sg, f.values, quad_nodes)));
}

RieszReport riesz_h1_experiment(const std::vector<Molecule>& molecules, const Semigroup& sg, int quad_nodes) {
  RieszReport r;
  for (const auto& m : molecules)
    if (!m.report.pass) throw InvalidArgument("riesz_h1_experiment: every molecule must be validated");
  r.entries.resize(molecules.size());
  parallel_for(static_cast<std::ptrdiff_t>(molecules.size()), [&](std::ptrdiff_t i) {
    const auto& m = molecules[i];
    const double l1 = lp_norm(riesz_apply(sg, m.field, quad_nodes).magnitude(), m.field.grid, 1.0);
    r.entries[i] = {static_cast<std::size_t>(i), m.cube.sidelength(), l1};
  });
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& e : r.entries) {
    r.sup = std::max(r.sup, e.l1);
    if (e.l1 > 0.0) lo = std::min(lo, e.l1);
  }
  r.min = std::isinf(lo) ? 0.0 : lo;
  r.spread = r.min > 0.0 ? r.sup / r.min : 1.0;
  return r;
}

std::string to_csv(const RieszReport& r) {
  std::ostringstream os;
  os << "id,cube_side,l1\n";
  for (const auto& e : r.entries) os << e.id << ',' << format_number(e.cube_side) << ',' << format_number(e.l1) << '\n';
  return os.str();
}

std::string to_string(CommutatorTarget t) { return t == CommutatorTarget::g_h ? "g_h" : "riesz"; }

CommutatorTarget commutator_target_from_string(const std::string& s) {
  if (s == "g_h") return CommutatorTarget::g_h;
  if (s == "riesz") return CommutatorTarget::riesz;
  throw InvalidArgument("unknown commutator target: " + s);
}

CommutatorMeasure gaffney_commutator_check(const Semigroup& sg, CommutatorTarget target, int M, double t,
                                           const std::vector<Index>& E, const std::vector<Index>& F,
                                           const TimeGrid& times, int quad_nodes) {
  const Grid& g = sg.grid();
  if (M < 1) throw InvalidArgument("commutator order must be at least 1");
  if (!(t > 0.0)) throw InvalidArgument("commutator time must be positive");
  CommutatorMeasure out;
  out.t = t;
  out.dist = set_distance(g, E, F);
  if (!(out.dist > 0.0)) throw InvalidArgument("gaffney_commutator_check: E and F must have positive distance");

  CVector f = ScalarField::indicator(g, E).values;
  f /= lp_norm(f, g, 2.0);

  // (I - e^{-tL})^M f by repeated differences, (tL e^{-tL})^M f as one symbol.
  CVector diff = f;
  for (int r = 0; r < M; ++r) diff -= sg.heat(t, diff);
  const CVector power = sg.heat_power_family({M * t}, M, f)[0] / std::pow(static_cast<double>(M), M);

  auto measure = [&](const CVector& u) {
    if (target == CommutatorTarget::g_h) {
      const ScalarField v = vertical_square_function(sg, ScalarField(g, u), VerticalKind::g_h, 1, times);
      return magnitude_l2_on(real_values(v), g, F);
    }
    return magnitude_l2_on(riesz_apply(sg, ScalarField(g, u), quad_nodes).magnitude(), g, F);
  };
  out.difference_norm = measure(diff);
  out.power_norm = measure(power);
  out.scale = std::pow(t / (out.dist * out.dist), M);
  out.difference_ratio = out.difference_norm / out.scale;
  out.power_ratio = out.power_norm / out.scale;
  return out;
}

CommutatorSweep commutator_sweep(const Semigroup& sg, CommutatorTarget target, int M, const std::vector<double>& t_values,
                                 const std::vector<Index>& E, const std::vector<Index>& F, const TimeGrid& times,
                                 int quad_nodes) {
  CommutatorSweep s;
  std::vector<double> a, b;
  for (double t : t_values) {
    s.rows.push_back(gaffney_commutator_check(sg, target, M, t, E, F, times, quad_nodes));
    a.push_back(s.rows.back().difference_norm);
    b.push_back(s.rows.back().power_norm);
  }
  s.difference_slope = loglog_slope(t_values, a);
  s.power_slope = loglog_slope(t_values, b);
  return s;
}

}  // namespace hardy
