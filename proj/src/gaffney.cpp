#include "hardy/gaffney.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "hardy/error.hpp"

namespace hardy {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<CVector> gradient(const Grid& g, const CVector& u) {
  const VectorField v = discrete_gradient(ScalarField(g, u));
  std::vector<CVector> out;
  for (int k = 0; k < g.dim(); ++k) out.push_back(v.components[k]);
  return out;
}

// Adjoint of the forward-difference gradient for the h^d-weighted products.
CVector gradient_adjoint(const Grid& g, const std::vector<CVector>& comps) {
  const double h = g.spacing();
  CVector out = CVector::Zero(g.node_count());
  for (Index v = 0; v < g.node_count(); ++v) {
    const auto c = g.coords(v);
    for (int k = 0; k < g.dim(); ++k) {
      auto back = c;
      back[k] -= 1;
      const Index b = g.wrap_index(back);
      Complex s = -comps[k][v];
      if (b >= 0) s += comps[k][b];
      out[v] += s / h;
    }
  }
  return out;
}

double l2_on(const Grid& g, const std::vector<CVector>& comps, const std::vector<Index>& nodes) {
  double s = 0.0;
  for (const auto& c : comps)
    for (Index i : nodes) s += std::norm(c[i]);
  return std::sqrt(s * g.cell_volume());
}

void require_sets(const Grid& g, const std::vector<Index>& E, const std::vector<Index>& F) {
  if (E.empty() || F.empty()) throw InvalidArgument("gaffney: E and F must be nonempty");
  for (Index i : E)
    if (i < 0 || i >= g.node_count()) throw InvalidArgument("gaffney: node index out of range");
  for (Index i : F)
    if (i < 0 || i >= g.node_count()) throw InvalidArgument("gaffney: node index out of range");
  if (!(set_distance(g, E, F) > 0.0)) throw InvalidArgument("gaffney: E and F must have positive distance");
}

// Least squares for y ~ X b; returns residual norm.
double least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Eigen::VectorXd& b) {
  b = X.colPivHouseholderQr().solve(y);
  return (X * b - y).norm();
}

}  // namespace

std::string to_string(GaffneyFamily f) {
  switch (f) {
    case GaffneyFamily::heat: return "heat";
    case GaffneyFamily::t_heat_deriv: return "t_heat_deriv";
    case GaffneyFamily::grad_heat: return "grad_heat";
    case GaffneyFamily::resolvent: return "resolvent";
    case GaffneyFamily::grad_resolvent: return "grad_resolvent";
  }
  return "?";
}

GaffneyFamily gaffney_family_from_string(const std::string& s) {
  for (auto f : {GaffneyFamily::heat, GaffneyFamily::t_heat_deriv, GaffneyFamily::grad_heat, GaffneyFamily::resolvent,
                 GaffneyFamily::grad_resolvent})
    if (to_string(f) == s) return f;
  throw InvalidArgument("unknown gaffney family: " + s);
}

bool is_gradient(GaffneyFamily f) { return f == GaffneyFamily::grad_heat || f == GaffneyFamily::grad_resolvent; }

std::vector<std::vector<CVector>> apply_family(const Semigroup& sg, GaffneyFamily family,
                                               const std::vector<double>& times, const CVector& f) {
  const Grid& g = sg.grid();
  std::vector<std::vector<CVector>> out(times.size());
  std::vector<CVector> base;
  if (family == GaffneyFamily::heat || family == GaffneyFamily::t_heat_deriv || family == GaffneyFamily::grad_heat) {
    base = sg.heat_family(times, f);
  } else {
    base.reserve(times.size());
    for (double t : times) base.push_back(sg.resolvent(t, f));
  }
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j];
    switch (family) {
      case GaffneyFamily::heat:
      case GaffneyFamily::resolvent:
        out[j] = {std::move(base[j])};
        break;
      case GaffneyFamily::t_heat_deriv:
        out[j] = {t * sg.apply(base[j])};
        break;
      case GaffneyFamily::grad_heat:
      case GaffneyFamily::grad_resolvent:
        out[j] = gradient(g, base[j]);
        for (auto& c : out[j]) c *= std::sqrt(t);
        break;
    }
  }
  return out;
}

std::vector<CVector> apply_family(const Semigroup& sg, GaffneyFamily family, double t, const CVector& f) {
  return apply_family(sg, family, std::vector<double>{t}, f).front();
}

double set_distance(const Grid& g, const std::vector<Index>& E, const std::vector<Index>& F) {
  // Gap between the closed cells [x - h/2, x + h/2]^d of the two sets.
  long best = std::numeric_limits<long>::max();
  for (Index a : E) {
    const auto ca = g.coords(a);
    for (Index b : F) {
      const auto cb = g.coords(b);
      long s = 0;
      for (int k = 0; k < g.dim(); ++k) {
        const long gap = std::max(0, std::abs(g.offset(k, ca[k], cb[k])) - 1);
        s += gap * gap;
      }
      best = std::min(best, s);
    }
  }
  return std::sqrt(static_cast<double>(best)) * g.spacing();
}

GaffneyFit fit_gaffney(double dist, double spacing, const std::vector<double>& t, const std::vector<double>& norms) {
  std::vector<std::size_t> use;
  const double lo = dist * spacing, hi = dist * dist / 4.0;
  double peak = 0.0;
  for (double v : norms) peak = std::max(peak, v);
  auto usable = [&](std::size_t j) { return norms[j] > 1e-13 * peak && norms[j] > 0.0; };
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t[j] >= lo && t[j] <= hi && usable(j)) use.push_back(j);
  if (use.size() < 4) {
    use.clear();
    for (std::size_t j = 0; j < t.size(); ++j)
      if (usable(j)) use.push_back(j);
  }
  GaffneyFit fit{kNaN, kNaN, kNaN, static_cast<int>(use.size())};
  if (use.size() < 4) return fit;

  const Index m = static_cast<Index>(use.size());
  Eigen::VectorXd y(m);
  for (Index i = 0; i < m; ++i) y[i] = std::log(norms[use[i]]);
  double best = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= 2800; ++step) {
    const double beta = 0.2 + 0.001 * step;
    Eigen::MatrixXd X(m, 3);
    for (Index i = 0; i < m; ++i) {
      const double tj = t[use[i]];
      X(i, 0) = 1.0;
      X(i, 1) = std::log(tj);
      X(i, 2) = -std::pow(dist * dist / tj, beta);
    }
    Eigen::VectorXd b;
    const double r = least_squares(X, y, b);
    if (b[2] > 0.0 && r < best) {
      best = r;
      fit.beta = beta;
      fit.c = std::pow(b[2], -1.0 / beta);
      fit.prefactor_slope = b[1];
    }
  }
  return fit;
}

GaffneyProfile gaffney_profile(const Semigroup& sg, GaffneyFamily family, const std::vector<Index>& E,
                               const std::vector<Index>& F, const TimeGrid& times) {
  const Grid& g = sg.grid();
  require_sets(g, E, F);
  CVector f = CVector::Zero(g.node_count());
  for (Index i : E) f[i] = 1.0;
  f /= lp_norm(f, g, 2.0);

  GaffneyProfile prof;
  prof.family_tag = to_string(family);
  prof.set_E = E;
  prof.set_F = F;
  prof.distances = {set_distance(g, E, F)};
  prof.t_values = times.samples();
  const auto images = apply_family(sg, family, times.samples(), f);
  std::vector<double> norms;
  for (const auto& comps : images) norms.push_back(l2_on(g, comps, F));
  prof.fits = {fit_gaffney(prof.distances[0], g.spacing(), prof.t_values, norms)};
  prof.measured_norms = {std::move(norms)};
  return prof;
}

GaffneyProfile offdiag_pq_profile(const Semigroup& sg, double p, double q, const std::vector<Index>& E,
                                  const std::vector<Index>& F, const TimeGrid& times, PqProbe probe) {
  const Grid& g = sg.grid();
  if (!(p >= 1.0) || !(q >= p)) throw InvalidArgument("offdiag_pq_profile needs 1 <= p <= q <= infinity");
  require_sets(g, E, F);
  const double vol = g.cell_volume();
  const Index n = g.node_count();
  const auto& ts = times.samples();

  GaffneyProfile prof;
  prof.family_tag = fmt::format("heat_L{}_L{}", p, q);
  prof.set_E = E;
  prof.set_F = F;
  prof.distances = {set_distance(g, E, F)};
  prof.t_values = ts;
  prof.p = p;
  prof.q = q;
  prof.predicted_slope = ((std::isinf(q) ? 0.0 : g.dim() / q) - g.dim() / p) / 2.0;

  std::vector<double> norms(ts.size(), 0.0);
  if (probe == PqProbe::indicator) {
    CVector f = CVector::Zero(n);
    for (Index i : E) f[i] = 1.0;
    f /= lp_norm(f, g, p);
    const auto u = sg.heat_family(ts, f);
    for (std::size_t j = 0; j < ts.size(); ++j) norms[j] = lp_norm_on(u[j], g, F, q);
  } else {
    // Kernel rows k_t(x, .) = conj(e^{-tL^*} delta_x) / h^d restricted to E.
    const Semigroup adj = sg.adjoint();
    const double pd = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    std::vector<double> best(ts.size(), -1.0);
    std::vector<CVector> best_row(ts.size());
    for (Index x : F) {
      CVector delta = CVector::Zero(n);
      delta[x] = 1.0 / vol;
      const auto rows = adj.heat_family(ts, delta);
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const double v = lp_norm_on(rows[j], g, E, pd);
        if (v > best[j]) {
          best[j] = v;
          best_row[j] = rows[j].conjugate();
        }
      }
    }
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (std::isinf(q)) {
        norms[j] = best[j];
        continue;
      }
      // Hölder extremal for the worst row, then the actual L^q(F) norm.
      const CVector& k = best_row[j];
      CVector f = CVector::Zero(n);
      if (p == 1.0) {
        Index arg = E.front();
        for (Index y : E)
          if (std::abs(k[y]) > std::abs(k[arg])) arg = y;
        f[arg] = std::abs(k[arg]) > 0 ? std::conj(k[arg]) / std::abs(k[arg]) : Complex(1.0);
      } else {
        for (Index y : E) {
          const double a = std::abs(k[y]);
          if (a > 0.0) f[y] = std::conj(k[y]) / a * (std::isinf(p) ? 1.0 : std::pow(a, pd - 1.0));
        }
      }
      const double fn = lp_norm(f, g, p);
      if (fn == 0.0) continue;
      norms[j] = lp_norm_on(sg.heat(ts[j], f), g, F, q) / fn;
    }
  }

  // Prefactor slope over d^2 << t << (side of the smaller set)^2.
  const double d = prof.distances[0];
  const double ell = std::pow(static_cast<double>(std::min(E.size(), F.size())) * vol, 1.0 / g.dim());
  std::vector<std::size_t> use;
  for (std::size_t j = 0; j < ts.size(); ++j)
    if (ts[j] >= 16.0 * d * d && ts[j] <= ell * ell / 16.0 && norms[j] > 0.0) use.push_back(j);
  if (use.size() < 4) {
    use.clear();
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (norms[j] > 0.0) use.push_back(j);
  }
  if (use.size() >= 3) {
    Eigen::MatrixXd X(use.size(), 3);
    Eigen::VectorXd y(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
      X(i, 0) = 1.0;
      X(i, 1) = std::log(ts[use[i]]);
      X(i, 2) = -d * d / ts[use[i]];
      y[i] = std::log(norms[use[i]]);
    }
    Eigen::VectorXd b;
    least_squares(X, y, b);
    prof.fitted_slope = b[1];
  } else {
    prof.fitted_slope = kNaN;
  }
  prof.fits = {fit_gaffney(d, g.spacing(), ts, norms)};
  prof.measured_norms = {std::move(norms)};
  return prof;
}

std::vector<double> family_operator_norms(const Semigroup& sg, GaffneyFamily family, const TimeGrid& times,
                                          int iterations) {
  const Grid& g = sg.grid();
  const Semigroup adj = sg.adjoint();
  std::vector<double> out;
  for (double t : times.samples()) {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> nd;
    CVector x(g.node_count());
    for (Index i = 0; i < x.size(); ++i) x[i] = Complex(nd(rng), nd(rng));
    x /= lp_norm(x, g, 2.0);
    double sigma2 = 0.0;
    for (int it = 0; it < iterations; ++it) {
      const auto y = apply_family(sg, family, t, x);
      CVector z;
      switch (family) {
        case GaffneyFamily::heat: z = adj.heat(t, y[0]); break;
        case GaffneyFamily::t_heat_deriv: z = t * adj.apply(adj.heat(t, y[0])); break;
        case GaffneyFamily::resolvent: z = adj.resolvent(t, y[0]); break;
        case GaffneyFamily::grad_heat: z = std::sqrt(t) * adj.heat(t, gradient_adjoint(g, y)); break;
        case GaffneyFamily::grad_resolvent: z = std::sqrt(t) * adj.resolvent(t, gradient_adjoint(g, y)); break;
      }
      sigma2 = inner(z, x, g).real();
      const double zn = lp_norm(z, g, 2.0);
      if (zn == 0.0) break;
      x = z / zn;
    }
    out.push_back(std::sqrt(std::max(sigma2, 0.0)));
  }
  return out;
}

void write_csv(std::ostream& os, const GaffneyProfile& prof) {
  os << "family,dist,t,norm,fitted_c,fitted_beta\n";
  for (std::size_t c = 0; c < prof.measured_norms.size(); ++c) {
    const GaffneyFit& fit = prof.fits[c];
    for (std::size_t j = 0; j < prof.t_values.size(); ++j)
      os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", prof.family_tag, prof.distances[c],
                        prof.t_values[j], prof.measured_norms[c][j], fit.c, fit.beta);
  }
}

}  // namespace hardy
