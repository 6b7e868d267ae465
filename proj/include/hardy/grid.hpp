#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hardy {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

enum class Boundary { periodic, dirichlet };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform cell-centred lattice in one or two dimensions.
///
/// Node i along an axis sits at the cell centre (i + 1/2) h, so a block of s
/// consecutive nodes is exactly the cube [a h, (a + s) h). Node indices are
/// ordered with axis 0 fastest.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<int> sizes, double spacing, Boundary boundary);

  static Grid line(int n, double spacing, Boundary boundary = Boundary::periodic);
  static Grid square(int nx, int ny, double spacing, Boundary boundary = Boundary::periodic);

  int dim() const { return dim_; }
  int size(int axis) const { return sizes_[axis]; }
  std::array<int, 2> sizes() const { return sizes_; }
  Index node_count() const { return node_count_; }
  double spacing() const { return spacing_; }
  Boundary boundary() const { return boundary_; }
  bool periodic() const { return boundary_ == Boundary::periodic; }

  double cell_volume() const;
  double side(int axis) const { return sizes_[axis] * spacing_; }
  /// Largest side length over all axes.
  double extent() const;

  std::array<int, 2> coords(Index node) const;
  Index index(std::array<int, 2> c) const;
  /// Maps possibly out-of-range coordinates to a node. Returns -1 when the
  /// coordinate falls outside a Dirichlet grid.
  Index wrap_index(std::array<int, 2> c) const;

  double position(Index node, int axis) const { return (coords(node)[axis] + 0.5) * spacing_; }

  /// Signed index offset b - a along one axis, minimum-image on periodic grids.
  int offset(int axis, int a, int b) const;
  /// Squared physical Euclidean distance between node centres.
  double distance2(Index a, Index b) const;
  double distance(Index a, Index b) const;

  /// Coefficient cells: one per node on periodic grids, (n+1) per axis on
  /// Dirichlet grids (the extra cell carries the flux through the boundary).
  Index cell_count() const;
  int cell_extent(int axis) const;
  /// Lower-corner node coordinate of a cell (may be -1 on Dirichlet grids).
  std::array<int, 2> cell_corner(Index cell) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int dim_ = 0;
  std::array<int, 2> sizes_{1, 1};
  double spacing_ = 0.0;
  Boundary boundary_ = Boundary::periodic;
  Index node_count_ = 0;
};

/// Complex value per grid node.
struct ScalarField {
  Grid grid;
  CVector values;

  ScalarField() = default;
  ScalarField(Grid g, CVector v);
  explicit ScalarField(const Grid& g);

  static ScalarField constant(const Grid& g, Complex c);
  static ScalarField indicator(const Grid& g, const std::vector<Index>& nodes);

  Index size() const { return values.size(); }
  Complex operator[](Index i) const { return values[i]; }
};

/// One complex component per axis per node.
struct VectorField {
  Grid grid;
  std::array<CVector, 2> components;

  /// Pointwise Euclidean magnitude.
  Eigen::VectorXd magnitude() const;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(Complex c, const ScalarField& a);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// Discrete L^p norm (sum h^d |u|^p)^{1/p}; p = infinity gives the max.
double lp_norm(const CVector& u, const Grid& g, double p);
double lp_norm(const Eigen::VectorXd& u, const Grid& g, double p);
/// Weighted inner product h^d sum u conj(v).
Complex inner(const CVector& u, const CVector& v, const Grid& g);
/// Same norm restricted to a node set.
double lp_norm_on(const CVector& u, const Grid& g, const std::vector<Index>& nodes, double p);

Complex mean(const CVector& u);

/// Lattice cube: a block of `count` nodes per axis starting at `corner`.
/// Physical side = count * h, centre = (corner + count/2) h. On periodic grids
/// the block wraps.
class Cube {
 public:
  Cube() = default;
  Cube(const Grid& grid, std::array<int, 2> corner, int count);

  const Grid& grid() const { return grid_; }
  std::array<int, 2> corner() const { return corner_; }
  int count() const { return count_; }
  double sidelength() const { return count_ * grid_.spacing(); }
  double center(int axis) const { return (corner_[axis] + 0.5 * count_) * grid_.spacing(); }
  double volume() const;

  /// Nodes of the cube (clipped on Dirichlet grids).
  std::vector<Index> nodes() const;
  bool contains(Index node) const;
  /// Sup-norm distance from the cube centre to a node centre, in units of h.
  double center_offset(Index node) const;

  /// 2^i Q: same centre, side 2^i l(Q), as a node predicate.
  bool in_dilate(Index node, int i) const;
  /// S_0 = Q, S_i = 2^i Q \ 2^{i-1} Q. Empty annuli yield empty lists.
  std::vector<Index> annulus(int i) const;
  /// Smallest i such that 2^i Q covers the whole grid.
  int covering_level() const;

  bool operator==(const Cube& o) const { return grid_ == o.grid_ && corner_ == o.corner_ && count_ == o.count_; }

 private:
  Grid grid_;
  std::array<int, 2> corner_{0, 0};
  int count_ = 1;
};

}  // namespace hardy
