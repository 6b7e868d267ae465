#include "hardy/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "hardy/error.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

namespace {

template <class E>
E parse_kind(const std::string& s, std::initializer_list<E> all, const char* what) {
  for (E k : all)
    if (to_string(k) == s) return k;
  throw InvalidArgument(std::string("unknown ") + what + ": " + s);
}

void check_power(const Semigroup& sg, int K) {
  if (K < 1 || K > sg.options().max_power) throw InvalidArgument("power must lie in [1, max_power]");
}

// (t^2 L)^K e^{-t^2 L} f for every sample.
std::vector<CVector> heat_powers(const Semigroup& sg, const CVector& f, int K, const TimeGrid& times) {
  std::vector<double> s;
  for (double t : times.samples()) s.push_back(t * t);
  return sg.heat_power_family(s, K, f);
}

std::vector<CVector> poissons(const Semigroup& sg, const CVector& f, const TimeGrid& times) {
  std::vector<CVector> u;
  for (double t : times.samples()) u.push_back(sg.poisson(t, f));
  return u;
}

void store(SpaceTimeField& F, int comp, int j, const CVector& v) { F.components[comp].col(j) = v; }

void store_gradient(SpaceTimeField& F, int first, int j, double scale, const CVector& u) {
  const VectorField g = discrete_gradient(ScalarField(F.grid, u));
  for (int k = 0; k < F.grid.dim(); ++k) F.components[first + k].col(j) = scale * g.components[k];
}

ScalarField real_field(const Grid& g, const Eigen::VectorXd& v) { return ScalarField(g, v.cast<Complex>()); }

}  // namespace

void ConeSpec::validate() const {
  if (!(aperture > 0.0)) throw InvalidArgument("cone aperture must be positive");
  if (!(t_lower >= 0.0) || !(t_lower < t_upper)) throw InvalidArgument("cone needs 0 <= t_lower < t_upper");
}

SpaceTimeField::SpaceTimeField(Grid g, TimeGrid t, std::string tag, int ncomp)
    : grid(std::move(g)), times(std::move(t)), integrand_tag(std::move(tag)) {
  components.assign(ncomp, Eigen::MatrixXcd::Zero(grid.node_count(), times.count()));
}

Eigen::MatrixXd SpaceTimeField::magnitude2() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(grid.node_count(), times.count());
  for (const auto& c : components) m += c.cwiseAbs2();
  return m;
}

std::string to_string(SquareKind k) {
  switch (k) {
    case SquareKind::heat: return "heat";
    case SquareKind::heat_K: return "heat_K";
    case SquareKind::poisson_grad: return "poisson_grad";
    case SquareKind::poisson_K: return "poisson_K";
    case SquareKind::poisson_tderiv: return "poisson_tderiv";
    case SquareKind::poisson_full_grad: return "poisson_full_grad";
  }
  return "?";
}

std::string to_string(VerticalKind k) {
  switch (k) {
    case VerticalKind::g_h: return "g_h";
    case VerticalKind::g_h_M: return "g_h_M";
    case VerticalKind::g_P: return "g_P";
    case VerticalKind::g_P_bar: return "g_P_bar";
    case VerticalKind::g_P_aux: return "g_P_aux";
  }
  return "?";
}

std::string to_string(MaximalKind k) {
  switch (k) {
    case MaximalKind::heat: return "heat";
    case MaximalKind::heat_beta: return "heat_beta";
    case MaximalKind::heat_star: return "heat_star";
    case MaximalKind::heat_star_M: return "heat_star_M";
    case MaximalKind::poisson: return "poisson";
    case MaximalKind::poisson_star: return "poisson_star";
  }
  return "?";
}

SquareKind square_kind_from_string(const std::string& s) {
  return parse_kind(s, {SquareKind::heat, SquareKind::heat_K, SquareKind::poisson_grad, SquareKind::poisson_K,
                        SquareKind::poisson_tderiv, SquareKind::poisson_full_grad}, "square function kind");
}

VerticalKind vertical_kind_from_string(const std::string& s) {
  return parse_kind(s, {VerticalKind::g_h, VerticalKind::g_h_M, VerticalKind::g_P, VerticalKind::g_P_bar,
                        VerticalKind::g_P_aux}, "vertical square function kind");
}

MaximalKind maximal_kind_from_string(const std::string& s) {
  return parse_kind(s, {MaximalKind::heat, MaximalKind::heat_beta, MaximalKind::heat_star, MaximalKind::heat_star_M,
                        MaximalKind::poisson, MaximalKind::poisson_star}, "maximal function kind");
}

SpaceTimeField square_integrand(const Semigroup& sg, const ScalarField& f, SquareKind kind, int K,
                                const TimeGrid& times) {
  require_same_grid(sg.grid(), f.grid, "square_function");
  const int d = f.grid.dim();
  const auto& ts = times.samples();
  switch (kind) {
    case SquareKind::heat:
    case SquareKind::heat_K: {
      const int power = kind == SquareKind::heat ? 1 : K;
      check_power(sg, power);
      SpaceTimeField F(f.grid, times, to_string(kind));
      const auto u = heat_powers(sg, f.values, power, times);
      for (int j = 0; j < times.count(); ++j) store(F, 0, j, u[j]);
      return F;
    }
    case SquareKind::poisson_grad: {
      SpaceTimeField F(f.grid, times, to_string(kind), d);
      const auto u = poissons(sg, f.values, times);
      for (int j = 0; j < times.count(); ++j) store_gradient(F, 0, j, ts[j], u[j]);
      return F;
    }
    case SquareKind::poisson_K: {
      check_power(sg, K);
      SpaceTimeField F(f.grid, times, to_string(kind));
      for (int j = 0; j < times.count(); ++j) store(F, 0, j, sg.poisson_power(ts[j], K, f.values));
      return F;
    }
    case SquareKind::poisson_tderiv: {
      SpaceTimeField F(f.grid, times, to_string(kind));
      const auto u = poissons(sg, sg.sqrt(f.values), times);
      for (int j = 0; j < times.count(); ++j) store(F, 0, j, ts[j] * u[j]);
      return F;
    }
    case SquareKind::poisson_full_grad: {
      SpaceTimeField F(f.grid, times, to_string(kind), d + 1);
      const auto u = poissons(sg, f.values, times);
      const auto v = poissons(sg, sg.sqrt(f.values), times);
      for (int j = 0; j < times.count(); ++j) {
        store_gradient(F, 0, j, ts[j], u[j]);
        store(F, d, j, ts[j] * v[j]);
      }
      return F;
    }
  }
  throw InvalidArgument("unknown square function kind");
}

SpaceTimeField vertical_integrand(const Semigroup& sg, const ScalarField& f, VerticalKind kind, int M,
                                  const TimeGrid& times) {
  require_same_grid(sg.grid(), f.grid, "vertical_square_function");
  const auto& ts = times.samples();
  switch (kind) {
    case VerticalKind::g_h: {
      auto F = square_integrand(sg, f, SquareKind::heat, 1, times);
      F.integrand_tag = to_string(kind);
      return F;
    }
    case VerticalKind::g_h_M: {
      auto F = square_integrand(sg, f, SquareKind::heat_K, M, times);
      F.integrand_tag = to_string(kind);
      return F;
    }
    case VerticalKind::g_P: {
      auto F = square_integrand(sg, f, SquareKind::poisson_grad, 1, times);
      F.integrand_tag = to_string(kind);
      return F;
    }
    case VerticalKind::g_P_bar: {
      auto F = square_integrand(sg, f, SquareKind::poisson_tderiv, 1, times);
      F.integrand_tag = to_string(kind);
      return F;
    }
    case VerticalKind::g_P_aux: {
      SpaceTimeField F(f.grid, times, to_string(kind));
      std::vector<double> s;
      for (double t : ts) s.push_back(t * t);
      const auto h = sg.heat_family(s, f.values);
      for (int j = 0; j < times.count(); ++j) store(F, 0, j, sg.poisson(ts[j], f.values) - h[j]);
      return F;
    }
  }
  throw InvalidArgument("unknown vertical square function kind");
}

SpaceTimeField maximal_integrand(const Semigroup& sg, const ScalarField& f, MaximalKind kind, int M,
                                 const TimeGrid& times) {
  require_same_grid(sg.grid(), f.grid, "nontangential_max");
  SpaceTimeField F(f.grid, times, to_string(kind));
  std::vector<CVector> u;
  switch (kind) {
    case MaximalKind::heat:
    case MaximalKind::heat_beta:
    case MaximalKind::heat_star: {
      std::vector<double> s;
      for (double t : times.samples()) s.push_back(t * t);
      u = sg.heat_family(s, f.values);
      break;
    }
    case MaximalKind::heat_star_M:
      check_power(sg, M);
      u = heat_powers(sg, f.values, M, times);
      break;
    case MaximalKind::poisson:
    case MaximalKind::poisson_star:
      u = poissons(sg, f.values, times);
      break;
  }
  for (int j = 0; j < times.count(); ++j) store(F, 0, j, u[j]);
  return F;
}

OffsetTable::OffsetTable(const Grid& g) {
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int k = 0; k < g.dim(); ++k) {
    const int n = g.size(k);
    if (g.periodic()) {
      lo[k] = -(n / 2);
      hi[k] = n - 1 - n / 2;
    } else {
      lo[k] = -(n - 1);
      hi[k] = n - 1;
    }
  }
  struct Entry {
    double d2;
    std::array<int, 2> o;
  };
  std::vector<Entry> all;
  const double h = g.spacing();
  for (int b = lo[1]; b <= hi[1]; ++b)
    for (int a = lo[0]; a <= hi[0]; ++a) {
      const double x = a * h, y = b * h;
      all.push_back({x * x + (g.dim() == 2 ? y * y : 0.0), {a, b}});
    }
  std::sort(all.begin(), all.end(), [](const Entry& p, const Entry& q) {
    if (p.d2 != q.d2) return p.d2 < q.d2;
    return p.o < q.o;
  });
  for (const auto& e : all) {
    offsets.push_back(e.o);
    dist2.push_back(e.d2);
  }
}

std::size_t OffsetTable::count_below(double r2) const {
  return static_cast<std::size_t>(std::lower_bound(dist2.begin(), dist2.end(), r2) - dist2.begin());
}

ScalarField cone_integrate(const SpaceTimeField& F, const ConeSpec& cone) {
  cone.validate();
  const Grid& g = F.grid;
  const int T = F.times.count();
  const Index N = g.node_count();
  const auto& ts = F.times.samples();
  const auto& ws = F.times.weights();
  const Eigen::MatrixXd mag = F.magnitude2();

  // suffix(y, k) = sum_{j >= k} c_j |F(y, t_j)|^2
  Eigen::MatrixXd suffix = Eigen::MatrixXd::Zero(N, T + 1);
  for (int j = T - 1; j >= 0; --j) {
    const bool inside = ts[j] > cone.t_lower && ts[j] < cone.t_upper;
    const double c = inside ? g.cell_volume() * ws[j] / std::pow(ts[j], g.dim()) : 0.0;
    suffix.col(j) = suffix.col(j + 1) + c * mag.col(j);
  }
  const OffsetTable table(g);
  std::vector<double> reach2(T);
  for (int j = 0; j < T; ++j) reach2[j] = (cone.aperture * ts[j]) * (cone.aperture * ts[j]);
  // First time index whose cone reaches each offset.
  std::vector<int> first(table.offsets.size());
  std::size_t used = 0;
  for (; used < table.offsets.size(); ++used) {
    const double d2 = table.dist2[used];
    const int j0 = static_cast<int>(std::upper_bound(reach2.begin(), reach2.end(), d2) - reach2.begin());
    if (j0 >= T) break;
    first[used] = j0;
  }

  Eigen::VectorXd out(N);
  parallel_for(N, [&](std::ptrdiff_t x) {
    const auto c = g.coords(x);
    double s = 0.0;
    for (std::size_t o = 0; o < used; ++o) {
      const Index y = g.wrap_index({c[0] + table.offsets[o][0], c[1] + table.offsets[o][1]});
      if (y >= 0) s += suffix(y, first[o]);
    }
    out[x] = std::sqrt(s);
  });
  return real_field(g, out);
}

ScalarField vertical_integrate(const SpaceTimeField& F) {
  const Eigen::MatrixXd mag = F.magnitude2();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(F.grid.node_count());
  for (int j = 0; j < F.times.count(); ++j) out += F.times.weights()[j] * mag.col(j);
  return real_field(F.grid, out.cwiseSqrt());
}

namespace {

// Mean of |F(., t_j)|^2 over the open ball B(y, radius_j) for every y and j.
Eigen::MatrixXd ball_means(const SpaceTimeField& F, const OffsetTable& table, const std::vector<double>& radius) {
  const Grid& g = F.grid;
  const Index N = g.node_count();
  const int T = F.times.count();
  const Eigen::MatrixXd mag = F.magnitude2();
  Eigen::MatrixXd means(N, T);
  for (int j = 0; j < T; ++j) {
    const std::size_t nb = std::max<std::size_t>(1, table.count_below(radius[j] * radius[j]));
    parallel_for(N, [&](std::ptrdiff_t y) {
      const auto c = g.coords(y);
      double s = 0.0;
      int count = 0;
      for (std::size_t o = 0; o < nb; ++o) {
        const Index z = g.wrap_index({c[0] + table.offsets[o][0], c[1] + table.offsets[o][1]});
        if (z < 0) continue;
        s += mag(z, j);
        ++count;
      }
      means(y, j) = s / count;
    });
  }
  return means;
}

}  // namespace

ScalarField cone_maximal(const SpaceTimeField& F, double aperture, double radius_factor) {
  if (!(aperture > 0.0) || !(radius_factor > 0.0)) throw InvalidArgument("aperture must be positive");
  const Grid& g = F.grid;
  const auto& ts = F.times.samples();
  const int T = F.times.count();
  const OffsetTable table(g);
  std::vector<double> radius(T);
  for (int j = 0; j < T; ++j) radius[j] = radius_factor * ts[j];
  const Eigen::MatrixXd means = ball_means(F, table, radius);

  Eigen::VectorXd out(g.node_count());
  parallel_for(g.node_count(), [&](std::ptrdiff_t x) {
    const auto c = g.coords(x);
    double best = 0.0;
    for (int j = 0; j < T; ++j) {
      const double r = aperture * ts[j];
      const std::size_t nb = table.count_below(r * r);
      for (std::size_t o = 0; o < nb; ++o) {
        const Index y = g.wrap_index({c[0] + table.offsets[o][0], c[1] + table.offsets[o][1]});
        if (y >= 0) best = std::max(best, means(y, j));
      }
    }
    out[x] = std::sqrt(best);
  });
  return real_field(g, out);
}

ScalarField star_maximal(const SpaceTimeField& F) {
  const OffsetTable table(F.grid);
  const Eigen::MatrixXd means = ball_means(F, table, F.times.samples());
  return real_field(F.grid, means.rowwise().maxCoeff().cwiseSqrt());
}

ScalarField square_function(const Semigroup& sg, const ScalarField& f, const ConeSpec& cone, SquareKind kind, int K,
                            const TimeGrid& times) {
  cone.validate();
  return cone_integrate(square_integrand(sg, f, kind, K, times), cone);
}

ScalarField vertical_square_function(const Semigroup& sg, const ScalarField& f, VerticalKind kind, int M,
                                     const TimeGrid& times) {
  return vertical_integrate(vertical_integrand(sg, f, kind, M, times));
}

ScalarField nontangential_max(const Semigroup& sg, const ScalarField& f, MaximalKind kind, double beta, int M,
                              const TimeGrid& times) {
  if (!(beta > 0.0)) throw InvalidArgument("aperture must be positive");
  const SpaceTimeField F = maximal_integrand(sg, f, kind, M, times);
  switch (kind) {
    case MaximalKind::heat:
    case MaximalKind::poisson:
      return cone_maximal(F, beta, 1.0);
    case MaximalKind::heat_beta:
      return cone_maximal(F, beta, beta);
    case MaximalKind::heat_star:
    case MaximalKind::heat_star_M:
    case MaximalKind::poisson_star:
      return star_maximal(F);
  }
  throw InvalidArgument("unknown maximal function kind");
}

ScalarField hl_maximal(const ScalarField& f) {
  const Grid& g = f.grid;
  const OffsetTable table(g);
  const Eigen::VectorXd a = f.values.cwiseAbs();
  Eigen::VectorXd out(g.node_count());
  parallel_for(g.node_count(), [&](std::ptrdiff_t x) {
    const auto c = g.coords(x);
    double s = 0.0, best = 0.0;
    int count = 0;
    for (std::size_t o = 0; o < table.offsets.size(); ++o) {
      const Index y = g.wrap_index({c[0] + table.offsets[o][0], c[1] + table.offsets[o][1]});
      if (y >= 0) {
        s += a[y];
        ++count;
      }
      const bool radius_done = o + 1 == table.offsets.size() || table.dist2[o + 1] != table.dist2[o];
      if (radius_done && count > 0) best = std::max(best, s / count);
    }
    out[x] = best;
  });
  return real_field(g, out);
}

ApertureReport aperture_compare(const SpaceTimeField& F, double alpha) {
  if (!(alpha >= 1.0)) throw InvalidArgument("aperture_compare needs alpha >= 1");
  const Grid& g = F.grid;
  ApertureReport r{};
  r.wide_norm = lp_norm(cone_integrate(F, ConeSpec{alpha}).values, g, 1.0);
  r.unit_norm = lp_norm(cone_integrate(F, ConeSpec{1.0}).values, g, 1.0);
  if (alpha == 1.0 || (r.wide_norm == 0.0 && r.unit_norm == 0.0))
    r.ratio = 1.0;
  else
    r.ratio = r.wide_norm / r.unit_norm;
  return r;
}

Eigen::VectorXd real_values(const ScalarField& f) { return f.values.real(); }

}  // namespace hardy
