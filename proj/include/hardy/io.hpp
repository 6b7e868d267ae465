#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hardy/coefficients.hpp"
#include "hardy/operator.hpp"

namespace hardy {

using Json = nlohmann::ordered_json;

// Complex arrays are stored interleaved [re0, im0, re1, im1, ...]; node order
// is the grid's (axis 0 fastest), coefficient matrices are row-major per cell.

Json to_json(const Grid& g);
Grid grid_from_json(const Json& j);

Json to_json(const ScalarField& f);
ScalarField field_from_json(const Json& j);

Json to_json(const Cube& q);
Cube cube_from_json(const Json& j, const Grid& g);

Json to_json(const CoefficientField& a);
CoefficientField coefficients_from_json(const Json& j);

/// Grid, ellipticity constants and the matrix as (row, col, re, im) entries.
Json to_json(const DiscreteOperator& op);

/// One line per node: node, coordinates, real part, imaginary part.
void write_field_csv(std::ostream& os, const ScalarField& f, const std::string& value_name = "value");

/// Shortest round-trip decimal form, so CSV bodies compare byte for byte.
std::string format_number(double x);

void write_text(const std::string& path, const std::string& body);
Json read_json_file(const std::string& path);

}  // namespace hardy
