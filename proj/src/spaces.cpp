#include "hardy/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "hardy/error.hpp"
#include "hardy/parallel.hpp"

namespace hardy {

namespace {

void check_order(const Grid& g, int M) {
  if (!(M > g.dim() / 4.0)) throw InvalidArgument("BMO order needs M > n/4");
  if (M < 1) throw InvalidArgument("BMO order must be at least 1");
}

// (I - A_l)^M f with A = e^{-l^2 L}, expanded binomially over one heat family.
CVector heat_difference(const Semigroup& sg, const CVector& f, double side, int M) {
  std::vector<double> times;
  for (int r = 1; r <= M; ++r) times.push_back(r * side * side);
  const auto powers = sg.heat_family(times, f);
  CVector out = f;
  double binom = 1.0;
  for (int r = 1; r <= M; ++r) {
    binom = binom * (M - r + 1) / r;
    out += (r % 2 ? -binom : binom) * powers[r - 1];
  }
  return out;
}

// Same with A = (I + l^2 L)^{-1}; A^r f by repeated solves.
CVector resolvent_difference(const Semigroup& sg, const CVector& f, double side, int M) {
  CVector out = f, power = f;
  double binom = 1.0;
  for (int r = 1; r <= M; ++r) {
    power = sg.resolvent(side * side, power);
    binom = binom * (M - r + 1) / r;
    out += (r % 2 ? -binom : binom) * power;
  }
  return out;
}

struct BallGeometry {
  std::vector<Index> nodes;
  std::vector<double> tent_depth;  // dist(y, complement of B) per node
  double volume;
};

BallGeometry ball_geometry(const Grid& g, const Ball& b) {
  BallGeometry out;
  const double r2 = b.radius * b.radius;
  std::vector<Index> outside;
  for (Index y = 0; y < g.node_count(); ++y) {
    if (g.distance2(b.centre, y) < r2)
      out.nodes.push_back(y);
    else
      outside.push_back(y);
  }
  for (Index y : out.nodes) {
    double best = std::numeric_limits<double>::infinity();
    for (Index z : outside) best = std::min(best, g.distance2(y, z));
    out.tent_depth.push_back(std::sqrt(best));
  }
  out.volume = static_cast<double>(out.nodes.size()) * g.cell_volume();
  return out;
}

// Periodic grids are translation invariant: one template per radius, moved
// to each centre. Dirichlet grids get a direct computation per ball.
class BallGeometryCache {
 public:
  explicit BallGeometryCache(const Grid& g) : g_(g) {}

  BallGeometry get(const Ball& b) {
    if (!g_.periodic()) return ball_geometry(g_, b);
    auto it = templates_.find(b.radius);
    if (it == templates_.end()) it = templates_.emplace(b.radius, ball_geometry(g_, {0, b.radius})).first;
    const BallGeometry& t = it->second;
    BallGeometry out = t;
    const auto c = g_.coords(b.centre);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto o = g_.coords(t.nodes[i]);
      out.nodes[i] = g_.wrap_index({o[0] + c[0], o[1] + c[1]});
    }
    return out;
  }

 private:
  const Grid& g_;
  std::map<double, BallGeometry> templates_;
};

// Cumulative h^n w_j |F(y, t_j)|^2 over the first J samples, per node.
Eigen::MatrixXd tent_prefix(const SpaceTimeField& F) {
  const Eigen::MatrixXd mag = F.magnitude2();
  const auto& w = F.times.weights();
  const double cell = F.grid.cell_volume();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(mag.rows(), mag.cols() + 1);
  for (Index j = 0; j < mag.cols(); ++j) P.col(j + 1) = P.col(j) + cell * w[j] * mag.col(j);
  return P;
}

double tent_mass(const BallGeometry& geo, const Eigen::MatrixXd& prefix, const std::vector<double>& samples) {
  double mass = 0.0;
  for (std::size_t i = 0; i < geo.nodes.size(); ++i) {
    const auto J = std::upper_bound(samples.begin(), samples.end(), geo.tent_depth[i]) - samples.begin();
    mass += prefix(geo.nodes[i], J);
  }
  return mass;
}

std::vector<double> ball_ratios(const SpaceTimeField& F, const std::vector<Ball>& balls, std::vector<double>& masses,
                                std::vector<std::vector<Index>>* members) {
  const Eigen::MatrixXd prefix = tent_prefix(F);
  BallGeometryCache cache(F.grid);
  std::vector<double> ratios(balls.size());
  masses.assign(balls.size(), 0.0);
  if (members) members->assign(balls.size(), {});
  for (std::size_t b = 0; b < balls.size(); ++b) {
    const BallGeometry geo = cache.get(balls[b]);
    masses[b] = tent_mass(geo, prefix, F.times.samples());
    ratios[b] = masses[b] / geo.volume;
    if (members) (*members)[b] = geo.nodes;
  }
  return ratios;
}

}  // namespace

std::string to_string(BmoVariant v) {
  switch (v) {
    case BmoVariant::heat: return "heat";
    case BmoVariant::resolvent: return "resolvent";
    case BmoVariant::p_variant: return "p";
  }
  return "?";
}

BmoVariant bmo_variant_from_string(const std::string& s) {
  for (BmoVariant v : {BmoVariant::heat, BmoVariant::resolvent, BmoVariant::p_variant})
    if (to_string(v) == s) return v;
  throw InvalidArgument("unknown BMO variant: " + s);
}

std::vector<Cube> bmo_cube_family(const Grid& g) {
  std::vector<Cube> out;
  if (g.dim() == 1) {
    const int n = g.size(0);
    for (int c = 2; c <= n; c *= 2) {
      const int last = g.periodic() ? (c == n ? 0 : n - 1) : n - c;
      for (int a = 0; a <= last; ++a) out.emplace_back(g, std::array<int, 2>{a, 0}, c);
    }
    return out;
  }
  const int n = std::min(g.size(0), g.size(1));
  for (int c = 2; c <= n; c *= 2)
    for (int y = 0; y + c <= g.size(1); y += c)
      for (int x = 0; x + c <= g.size(0); x += c) out.emplace_back(g, std::array<int, 2>{x, y}, c);
  return out;
}

BmoReport bmo_norm(const Semigroup& sg, const ScalarField& f, int M, BmoVariant variant, double p) {
  return bmo_norm(sg, f, M, variant, p, bmo_cube_family(f.grid));
}

BmoReport bmo_norm(const Semigroup& sg, const ScalarField& f, int M, BmoVariant variant, double p,
                   const std::vector<Cube>& family) {
  require_same_grid(sg.grid(), f.grid, "bmo_norm");
  check_order(f.grid, M);
  const double q = variant == BmoVariant::p_variant ? p : 2.0;
  if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidArgument("BMO exponent must be finite and at least 1");

  BmoReport r;
  r.variant = variant;
  r.M = M;
  r.p = q;
  std::map<int, CVector> differences;
  for (const auto& c : family)
    if (!differences.count(c.count())) differences[c.count()] = CVector();
  for (auto& [count, g] : differences) {
    const double side = count * f.grid.spacing();
    g = variant == BmoVariant::resolvent ? resolvent_difference(sg, f.values, side, M)
                                         : heat_difference(sg, f.values, side, M);
  }

  r.per_cube.resize(family.size(), {Cube(), 0.0});
  parallel_for(static_cast<std::ptrdiff_t>(family.size()), [&](std::ptrdiff_t i) {
    const Cube& c = family[i];
    const CVector& g = differences.at(c.count());
    const auto nodes = c.nodes();
    double s = 0.0;
    for (Index x : nodes) s += std::pow(std::abs(g[x]), q);
    r.per_cube[i] = {c, std::pow(s / nodes.size(), 1.0 / q)};
  });
  for (std::size_t i = 0; i < r.per_cube.size(); ++i)
    if (r.per_cube[i].value > r.norm) {
      r.norm = r.per_cube[i].value;
      r.argmax = i;
    }
  return r;
}

std::vector<Ball> ball_family(const Grid& g) {
  const OffsetTable table(g);
  const double widest = table.dist2.back();
  std::vector<Ball> out;
  for (int j = 1;; ++j) {
    const double r = std::ldexp(g.spacing(), j);
    const int step = g.dim() == 1 ? 1 : std::max(1, 1 << (j - 1));
    const int ny = g.dim() == 2 ? g.size(1) : 1;
    for (int y = 0; y < ny; y += step)
      for (int x = 0; x < g.size(0); x += step) out.push_back({g.index({x, y}), r});
    if (r * r > widest) break;
  }
  return out;
}

CarlesonReport carleson_measure(const SpaceTimeField& F) {
  const auto balls = ball_family(F.grid);
  std::vector<double> masses;
  const auto ratios = ball_ratios(F, balls, masses, nullptr);
  CarlesonReport r;
  for (std::size_t b = 0; b < balls.size(); ++b) {
    r.per_ball.push_back({balls[b], masses[b], ratios[b]});
    if (ratios[b] > r.carleson_norm) {
      r.carleson_norm = ratios[b];
      r.argmax = b;
    }
  }
  return r;
}

CarlesonReport carleson_functional(const Semigroup& sg, const ScalarField& f, int M, const TimeGrid& times) {
  require_same_grid(sg.grid(), f.grid, "carleson_functional");
  check_order(f.grid, M);
  SpaceTimeField F(f.grid, times, "carleson");
  std::vector<double> s;
  for (double t : times.samples()) s.push_back(t * t);
  const auto u = sg.heat_power_family(s, M, f.values);
  for (int j = 0; j < times.count(); ++j) F.components[0].col(j) = u[j];
  return carleson_measure(F);
}

ScalarField carleson_function(const SpaceTimeField& F) {
  const auto balls = ball_family(F.grid);
  std::vector<double> masses;
  std::vector<std::vector<Index>> members;
  const auto ratios = ball_ratios(F, balls, masses, &members);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(F.grid.node_count());
  for (std::size_t b = 0; b < balls.size(); ++b)
    for (Index x : members[b]) c[x] = std::max(c[x], std::sqrt(ratios[b]));
  return ScalarField(F.grid, c.cast<Complex>());
}

TentNorms tent_norms(const SpaceTimeField& F) {
  TentNorms n;
  n.t1 = lp_norm(real_values(cone_integrate(F, ConeSpec{})), F.grid, 1.0);
  n.tinf = real_values(carleson_function(F)).maxCoeff();
  return n;
}

double duality_constant(int M) {
  if (M < 1) throw InvalidArgument("duality pairing needs M >= 1");
  return std::ldexp(1.0, M + 2) / std::tgamma(M + 1.0);
}

Complex duality_pair(const Semigroup& sg, const ScalarField& f, const ScalarField& g, int M, const TimeGrid& times) {
  require_same_grid(sg.grid(), f.grid, "duality_pair");
  require_same_grid(sg.grid(), g.grid, "duality_pair");
  const double C = duality_constant(M);
  const CVector f0 = sg.require_range(f.values);
  const CVector g0 = sg.require_range(g.values);
  std::vector<double> s;
  for (double t : times.samples()) s.push_back(t * t);
  const auto a = sg.adjoint().heat_power_family(s, M, f0);
  const auto b = sg.heat_power_family(s, 1, g0);
  Complex sum = 0.0;
  for (int j = 0; j < times.count(); ++j) sum += times.weights()[j] * inner(a[j], b[j], f.grid);
  return C * sum;
}

JohnNirenbergTable john_nirenberg_compare(const Semigroup& sg, const ScalarField& f, int M,
                                          const std::vector<double>& p_list) {
  if (p_list.empty()) throw InvalidArgument("john_nirenberg_compare needs at least one exponent");
  JohnNirenbergTable t;
  t.p = p_list;
  for (double p : p_list) t.norms.push_back(bmo_norm(sg, f, M, BmoVariant::p_variant, p).norm);
  const Index k = static_cast<Index>(p_list.size());
  t.ratios.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) {
      const double a = t.norms[i], b = t.norms[j];
      t.ratios(i, j) = (a == 0.0 && b == 0.0) ? 1.0 : a / b;
    }
  return t;
}

std::string to_csv(const BmoReport& r) {
  std::ostringstream os;
  os << "variant,M,p,corner0,corner1,side,value\n";
  for (const auto& c : r.per_cube)
    os << to_string(r.variant) << ',' << r.M << ',' << format_number(r.p) << ',' << c.cube.corner()[0] << ','
       << c.cube.corner()[1] << ',' << format_number(c.cube.sidelength()) << ',' << format_number(c.value) << '\n';
  return os.str();
}

std::string to_csv(const CarlesonReport& r, const Grid& g) {
  std::ostringstream os;
  os << "centre";
  for (int a = 0; a < g.dim(); ++a) os << ",x" << a;
  os << ",radius,mass,ratio\n";
  for (const auto& b : r.per_ball) {
    os << b.ball.centre;
    for (int a = 0; a < g.dim(); ++a) os << ',' << format_number(g.position(b.ball.centre, a));
    os << ',' << format_number(b.ball.radius) << ',' << format_number(b.mass) << ',' << format_number(b.ratio) << '\n';
  }
  return os.str();
}

Json summary_json(const BmoReport& r) {
  Json j{{"variant", to_string(r.variant)}, {"M", r.M}, {"p", r.p}, {"norm", r.norm}, {"cubes", r.per_cube.size()}};
  if (!r.per_cube.empty()) j["argmax"] = to_json(r.per_cube[r.argmax].cube);
  return j;
}

Json summary_json(const CarlesonReport& r, const Grid& g) {
  Json j{{"carleson_norm", r.carleson_norm}, {"balls", r.per_ball.size()}};
  if (!r.per_ball.empty()) {
    const auto& b = r.per_ball[r.argmax].ball;
    Json centre = Json::array();
    for (int a = 0; a < g.dim(); ++a) centre.push_back(g.position(b.centre, a));
    j["argmax"] = {{"centre", centre}, {"radius", b.radius}};
  }
  return j;
}

}  // namespace hardy
