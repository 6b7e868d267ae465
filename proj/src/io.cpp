#include "hardy/io.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

#include "hardy/error.hpp"

namespace hardy {

namespace {

Json interleave(const CVector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(v[i].real());
    a.push_back(v[i].imag());
  }
  return a;
}

CVector deinterleave(const Json& a, Index n) {
  if (!a.is_array() || static_cast<Index>(a.size()) != 2 * n)
    throw InvalidArgument(fmt::format("expected {} interleaved values, got {}", 2 * n, a.size()));
  CVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(a[2 * i].get<double>(), a[2 * i + 1].get<double>());
  return v;
}

}  // namespace

Json to_json(const Grid& g) {
  Json sizes = Json::array();
  for (int a = 0; a < g.dim(); ++a) sizes.push_back(g.size(a));
  return {{"dim", g.dim()}, {"sizes", sizes}, {"spacing", g.spacing()}, {"boundary", to_string(g.boundary())}};
}

Grid grid_from_json(const Json& j) {
  try {
    return Grid(j.at("sizes").get<std::vector<int>>(), j.at("spacing").get<double>(),
                boundary_from_string(j.value("boundary", std::string("periodic"))));
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed grid: ") + e.what());
  }
}

Json to_json(const ScalarField& f) {
  Json shape = Json::array();
  for (int a = 0; a < f.grid.dim(); ++a) shape.push_back(f.grid.size(a));
  return {{"grid", to_json(f.grid)}, {"shape", shape}, {"values", interleave(f.values)}};
}

ScalarField field_from_json(const Json& j) {
  const Grid g = grid_from_json(j.at("grid"));
  return ScalarField(g, deinterleave(j.at("values"), g.node_count()));
}

Json to_json(const Cube& q) {
  Json corner = Json::array();
  for (int a = 0; a < q.grid().dim(); ++a) corner.push_back(q.corner()[a]);
  return {{"corner", corner}, {"count", q.count()}, {"sidelength", q.sidelength()}};
}

Cube cube_from_json(const Json& j, const Grid& g) {
  const auto c = j.at("corner").get<std::vector<int>>();
  std::array<int, 2> corner{0, 0};
  for (std::size_t a = 0; a < c.size() && a < 2; ++a) corner[a] = c[a];
  return Cube(g, corner, j.at("count").get<int>());
}

Json to_json(const CoefficientField& a) {
  const int d = a.grid().dim();
  Json cells = Json::array();
  for (const auto& m : a.matrices())
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) {
        cells.push_back(m(r, c).real());
        cells.push_back(m(r, c).imag());
      }
  return {{"grid", to_json(a.grid())}, {"lambda", a.lambda()}, {"Lambda", a.Lambda()}, {"matrices", cells}};
}

CoefficientField coefficients_from_json(const Json& j) {
  const Grid g = grid_from_json(j.at("grid"));
  const int d = g.dim();
  const Json& cells = j.at("matrices");
  const std::size_t per = 2 * d * d;
  if (!cells.is_array() || cells.size() != per * g.cell_count())
    throw InvalidArgument(fmt::format("coefficient file needs {} numbers, has {}", per * g.cell_count(), cells.size()));
  std::vector<CMatrix2> mats(g.cell_count(), CMatrix2::Identity());
  std::size_t k = 0;
  for (auto& m : mats)
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c, k += 2) m(r, c) = Complex(cells[k].get<double>(), cells[k + 1].get<double>());
  return CoefficientField(g, std::move(mats));
}

Json to_json(const DiscreteOperator& op) {
  Json entries = Json::array();
  const SparseMatrix& m = op.matrix();
  for (Index c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it)
      entries.push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
  return {{"grid", to_json(op.grid())},
          {"lambda", op.lambda()},
          {"Lambda", op.Lambda()},
          {"hermitian", op.hermitian()},
          {"entries", entries}};
}

std::string format_number(double x) { return fmt::format("{}", x); }

void write_field_csv(std::ostream& os, const ScalarField& f, const std::string& value_name) {
  const Grid& g = f.grid;
  os << "node";
  for (int a = 0; a < g.dim(); ++a) os << ",x" << a;
  os << ',' << value_name << "_re," << value_name << "_im\n";
  for (Index x = 0; x < g.node_count(); ++x) {
    os << x;
    for (int a = 0; a < g.dim(); ++a) os << ',' << format_number(g.position(x, a));
    os << ',' << format_number(f.values[x].real()) << ',' << format_number(f.values[x].imag()) << '\n';
  }
}

void write_text(const std::string& path, const std::string& body) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << body;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace hardy
