#include "hardy/operator.hpp"

#include <cmath>
#include <numbers>

#include "hardy/error.hpp"

namespace hardy {

DiscreteOperator::DiscreteOperator(Grid grid, SparseMatrix matrix, double lambda, double Lambda)
    : grid_(std::move(grid)), matrix_(std::move(matrix)), lambda_(lambda), Lambda_(Lambda) {
  matrix_.makeCompressed();
  adjoint_ = matrix_.adjoint();
  adjoint_.makeCompressed();
  const SparseMatrix diff = matrix_ - adjoint_;
  hermitian_ = true;
  for (Index k = 0; k < diff.outerSize() && hermitian_; ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it)
      if (it.value() != Complex(0.0)) {
        hermitian_ = false;
        break;
      }
}

DiscreteOperator DiscreteOperator::adjoint() const {
  DiscreteOperator out = *this;
  std::swap(out.matrix_, out.adjoint_);
  return out;
}

ScalarField DiscreteOperator::apply(const ScalarField& u) const {
  require_same_grid(grid_, u.grid, "DiscreteOperator::apply");
  return {grid_, matrix_ * u.values};
}

double laplacian_gap(const Grid& grid) {
  const double h = grid.spacing();
  if (grid.periodic()) {
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.dim(); ++a) {
      const double s = 2.0 / h * std::sin(std::numbers::pi / grid.size(a));
      gap = std::min(gap, s * s);
    }
    return gap;
  }
  double gap = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double s = 2.0 / h * std::sin(std::numbers::pi / (2.0 * (grid.size(a) + 1)));
    gap += s * s;
  }
  return gap;
}

SpectralBounds DiscreteOperator::spectral_bounds() const {
  const double h = grid_.spacing();
  return {lambda_ * laplacian_gap(grid_), Lambda_ * 4.0 * grid_.dim() / (h * h)};
}

DiscreteOperator assemble_operator(const Grid& grid, const CoefficientField& coeff) {
  if (coeff.grid() != grid) throw InvalidArgument("assemble_operator: coefficient grid does not match");
  const auto constants = check_ellipticity(coeff);
  const int d = grid.dim();
  const double h = grid.spacing();

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(static_cast<std::size_t>(grid.cell_count()) * (d + 1) * (d + 1));

  // Local gradient on a cell: row k = (u(c + e_k) - u(c)) / h over nodes {c, c + e_0, .., c + e_{d-1}}.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d + 1);
  for (int k = 0; k < d; ++k) {
    g(k, 0) = -1.0 / h;
    g(k, k + 1) = 1.0 / h;
  }

  std::array<Index, 3> local{};
  for (Index cell = 0; cell < grid.cell_count(); ++cell) {
    const auto c = grid.cell_corner(cell);
    local[0] = grid.wrap_index(c);
    for (int k = 0; k < d; ++k) {
      auto ck = c;
      ck[k] += 1;
      local[k + 1] = grid.wrap_index(ck);
    }
    const Eigen::MatrixXcd a = coeff.at(cell).topLeftCorner(d, d);
    const Eigen::MatrixXcd element = g.transpose().cast<Complex>() * a * g.cast<Complex>();
    for (int r = 0; r <= d; ++r) {
      if (local[r] < 0) continue;
      for (int s = 0; s <= d; ++s) {
        if (local[s] < 0 || element(r, s) == Complex(0.0)) continue;
        triplets.emplace_back(local[r], local[s], element(r, s));
      }
    }
  }

  SparseMatrix m(grid.node_count(), grid.node_count());
  m.setFromTriplets(triplets.begin(), triplets.end());
  if (coeff.hermitian()) {
    // Round-off in the element sums can break exact symmetry; restore it.
    SparseMatrix sym = 0.5 * (m + SparseMatrix(m.adjoint()));
    m = sym;
  }
  m.prune(Complex(0.0));
  return DiscreteOperator(grid, std::move(m), constants.lambda, constants.Lambda);
}

VectorField discrete_gradient(const ScalarField& u) {
  const Grid& g = u.grid;
  VectorField out;
  out.grid = g;
  const double h = g.spacing();
  for (int a = 0; a < g.dim(); ++a) {
    CVector comp(g.node_count());
    for (Index x = 0; x < g.node_count(); ++x) {
      auto c = g.coords(x);
      c[a] += 1;
      const Index nb = g.wrap_index(c);
      const Complex next = nb < 0 ? Complex(0.0) : u.values[nb];
      comp[x] = (next - u.values[x]) / h;
    }
    out.components[a] = std::move(comp);
  }
  return out;
}

}  // namespace hardy
