#pragma once

#include <string>
#include <vector>

#include "hardy/coefficients.hpp"
#include "hardy/io.hpp"

namespace hardy {

struct OracleCheck {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct OracleReport {
  std::string label;
  std::vector<OracleCheck> checks;
  double seconds = 0.0;
  bool pass() const;
  int failures() const;
};

/// grid_operator, semigroup, gaffney, functionals, decomposition, spaces, riesz.
std::vector<std::string> oracle_suite_names();

/// Dense and brute-force comparisons on one grid and coefficient field. Dense
/// oracles need node_count <= 1024. Throws InvalidArgument on an empty or
/// unknown selection.
OracleReport run_oracle_suite(const Grid& g, const CoefficientField& a, const std::vector<std::string>& suites,
                              const std::string& label = "");

Json to_json(const OracleReport& r);

}  // namespace hardy
