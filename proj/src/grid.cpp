#include "hardy/grid.hpp"

#include <algorithm>
#include <cmath>

#include "hardy/error.hpp"

namespace hardy {

std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "dirichlet"; }

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet") return Boundary::dirichlet;
  throw InvalidArgument("unknown boundary '" + s + "' (expected periodic or dirichlet)");
}

Grid::Grid(std::vector<int> sizes, double spacing, Boundary boundary)
    : spacing_(spacing), boundary_(boundary) {
  if (sizes.empty() || sizes.size() > 2) throw InvalidArgument("grid dimension must be 1 or 2");
  if (!(spacing > 0.0)) throw InvalidArgument("grid spacing must be positive");
  dim_ = static_cast<int>(sizes.size());
  node_count_ = 1;
  for (int a = 0; a < dim_; ++a) {
    if (sizes[a] < 8) throw InvalidArgument("every grid size must be at least 8");
    sizes_[a] = sizes[a];
    node_count_ *= sizes[a];
  }
}

Grid Grid::line(int n, double spacing, Boundary boundary) { return Grid({n}, spacing, boundary); }

Grid Grid::square(int nx, int ny, double spacing, Boundary boundary) {
  return Grid({nx, ny}, spacing, boundary);
}

double Grid::cell_volume() const { return std::pow(spacing_, dim_); }

double Grid::extent() const {
  double e = 0.0;
  for (int a = 0; a < dim_; ++a) e = std::max(e, side(a));
  return e;
}

std::array<int, 2> Grid::coords(Index node) const {
  return {static_cast<int>(node % sizes_[0]), static_cast<int>(node / sizes_[0])};
}

Index Grid::index(std::array<int, 2> c) const { return c[0] + static_cast<Index>(sizes_[0]) * c[1]; }

Index Grid::wrap_index(std::array<int, 2> c) const {
  for (int a = 0; a < dim_; ++a) {
    const int n = sizes_[a];
    if (periodic()) {
      c[a] = ((c[a] % n) + n) % n;
    } else if (c[a] < 0 || c[a] >= n) {
      return -1;
    }
  }
  if (dim_ == 1) c[1] = 0;
  return index(c);
}

int Grid::offset(int axis, int a, int b) const {
  int d = b - a;
  if (periodic()) {
    const int n = sizes_[axis];
    d = ((d % n) + n) % n;
    if (2 * d >= n) d -= n;
  }
  return d;
}

double Grid::distance2(Index a, Index b) const {
  const auto ca = coords(a);
  const auto cb = coords(b);
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) {
    const double d = offset(k, ca[k], cb[k]) * spacing_;
    s += d * d;
  }
  return s;
}

double Grid::distance(Index a, Index b) const { return std::sqrt(distance2(a, b)); }

int Grid::cell_extent(int axis) const {
  if (axis >= dim_) return 1;
  return periodic() ? sizes_[axis] : sizes_[axis] + 1;
}

Index Grid::cell_count() const {
  Index c = 1;
  for (int a = 0; a < dim_; ++a) c *= cell_extent(a);
  return c;
}

std::array<int, 2> Grid::cell_corner(Index cell) const {
  const int e0 = cell_extent(0);
  std::array<int, 2> c{static_cast<int>(cell % e0), static_cast<int>(cell / e0)};
  if (!periodic()) {
    c[0] -= 1;
    if (dim_ == 2) c[1] -= 1;
  }
  return c;
}

bool Grid::operator==(const Grid& o) const {
  return dim_ == o.dim_ && sizes_ == o.sizes_ && spacing_ == o.spacing_ && boundary_ == o.boundary_;
}

ScalarField::ScalarField(Grid g, CVector v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count()) throw InvalidArgument("field length does not match grid node count");
}

ScalarField::ScalarField(const Grid& g) : grid(g), values(CVector::Zero(g.node_count())) {}

ScalarField ScalarField::constant(const Grid& g, Complex c) {
  return ScalarField(g, CVector::Constant(g.node_count(), c));
}

ScalarField ScalarField::indicator(const Grid& g, const std::vector<Index>& nodes) {
  ScalarField f(g);
  for (Index i : nodes) f.values[i] = 1.0;
  return f;
}

Eigen::VectorXd VectorField::magnitude() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(grid.node_count());
  for (int a = 0; a < grid.dim(); ++a) m += components[a].cwiseAbs2();
  return m.cwiseSqrt();
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw InvalidArgument(std::string(where) + ": grid mismatch");
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "field addition");
  return {a.grid, a.values + b.values};
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "field subtraction");
  return {a.grid, a.values - b.values};
}

ScalarField operator*(Complex c, const ScalarField& a) { return {a.grid, c * a.values}; }

double lp_norm(const Eigen::VectorXd& u, const Grid& g, double p) {
  if (std::isinf(p)) return u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  double s = 0.0;
  for (Index i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

double lp_norm(const CVector& u, const Grid& g, double p) {
  return lp_norm(Eigen::VectorXd(u.cwiseAbs()), g, p);
}

double lp_norm_on(const CVector& u, const Grid& g, const std::vector<Index>& nodes, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (Index i : nodes) m = std::max(m, std::abs(u[i]));
    return m;
  }
  double s = 0.0;
  for (Index i : nodes) s += std::pow(std::abs(u[i]), p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

Complex inner(const CVector& u, const CVector& v, const Grid& g) {
  // v.dot(u) = sum conj(v_i) u_i
  return v.dot(u) * g.cell_volume();
}

Complex mean(const CVector& u) { return u.size() ? u.mean() : Complex(0.0); }

Cube::Cube(const Grid& grid, std::array<int, 2> corner, int count) : grid_(grid), corner_(corner), count_(count) {
  if (count < 1) throw InvalidArgument("cube must contain at least one node per axis");
  if (grid.dim() == 1) corner_[1] = 0;
  for (int a = 0; a < grid.dim(); ++a) {
    if (count > grid.size(a)) throw InvalidArgument("cube larger than grid");
    if (!grid.periodic() && (corner_[a] < 0 || corner_[a] + count > grid.size(a)))
      throw InvalidArgument("cube leaves a Dirichlet grid");
  }
}

double Cube::volume() const { return std::pow(sidelength(), grid_.dim()); }

double Cube::center_offset(Index node) const {
  const auto c = grid_.coords(node);
  double m = 0.0;
  for (int a = 0; a < grid_.dim(); ++a) {
    double d = (c[a] + 0.5) - (corner_[a] + 0.5 * count_);
    if (grid_.periodic()) {
      const double n = grid_.size(a);
      d = std::fmod(d, n);
      if (d < -0.5 * n) d += n;
      if (d >= 0.5 * n) d -= n;
    }
    m = std::max(m, std::abs(d));
  }
  return m;
}

bool Cube::in_dilate(Index node, int i) const {
  return center_offset(node) < std::ldexp(0.5 * count_, i);
}

bool Cube::contains(Index node) const { return in_dilate(node, 0); }

std::vector<Index> Cube::nodes() const { return annulus(0); }

std::vector<Index> Cube::annulus(int i) const {
  std::vector<Index> out;
  const double outer = std::ldexp(0.5 * count_, i);
  const double inner_r = i == 0 ? -1.0 : std::ldexp(0.5 * count_, i - 1);
  for (Index x = 0; x < grid_.node_count(); ++x) {
    const double d = center_offset(x);
    if (d < outer && !(d < inner_r)) out.push_back(x);
  }
  return out;
}

int Cube::covering_level() const {
  double worst = 0.0;
  for (Index x = 0; x < grid_.node_count(); ++x) worst = std::max(worst, center_offset(x));
  int i = 0;
  while (!(worst < std::ldexp(0.5 * count_, i))) ++i;
  return i;
}

}  // namespace hardy
