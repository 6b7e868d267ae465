#pragma once

#include <string>
#include <vector>

#include "hardy/functionals.hpp"
#include "hardy/io.hpp"

namespace hardy {

enum class BmoVariant {
  heat,       // (I - e^{-l^2 L})^M, L^2 averages
  resolvent,  // (I - (I + l^2 L)^{-1})^M, L^2 averages
  p_variant,  // heat with L^p averages
};
std::string to_string(BmoVariant v);
BmoVariant bmo_variant_from_string(const std::string& s);

/// Dyadic cubes of side >= 2h. In 1D every position is used (wrapping on
/// periodic grids); in 2D the corners are multiples of the side.
std::vector<Cube> bmo_cube_family(const Grid& g);

struct CubeValue {
  Cube cube;
  double value;
};

struct BmoReport {
  BmoVariant variant = BmoVariant::heat;
  int M = 1;
  double p = 2.0;
  std::vector<CubeValue> per_cube;
  double norm = 0.0;
  std::size_t argmax = 0;
};

BmoReport bmo_norm(const Semigroup& sg, const ScalarField& f, int M, BmoVariant variant, double p = 2.0);
/// Same over an explicit cube family.
BmoReport bmo_norm(const Semigroup& sg, const ScalarField& f, int M, BmoVariant variant, double p,
                   const std::vector<Cube>& family);

/// Open lattice ball {y : |y - centre| < radius}.
struct Ball {
  Index centre;
  double radius;
};

/// Radii 2^j h from 2h up to the first radius whose ball covers the grid.
/// Centres: every node in 1D; multiples of max(1, 2^{j-1}) per axis in 2D.
std::vector<Ball> ball_family(const Grid& g);

struct BallValue {
  Ball ball;
  double mass;   // mu(tent over B)
  double ratio;  // mass / |B|
};

struct CarlesonReport {
  std::vector<BallValue> per_ball;
  double carleson_norm = 0.0;
  std::size_t argmax = 0;
};

/// Carleson norm of |F|^2 dy dt/t over the tents {(y, t) : dist(y, complement of B) >= t}.
CarlesonReport carleson_measure(const SpaceTimeField& F);
/// Same for mu_f = |(t^2 L)^M e^{-t^2 L} f|^2 dy dt/t.
CarlesonReport carleson_functional(const Semigroup& sg, const ScalarField& f, int M, const TimeGrid& times);

/// C F(x) = sup over family balls containing x of the root tent mass per volume.
ScalarField carleson_function(const SpaceTimeField& F);

struct TentNorms {
  double t1 = 0.0;    // ||S F||_1 with aperture 1
  double tinf = 0.0;  // ||C F||_inf
};
TentNorms tent_norms(const SpaceTimeField& F);

/// 2^{M+2} / Gamma(M+1): the constant that makes the pairing exact on eigenmodes.
double duality_constant(int M);
/// C'_M sum_j w_j <(t_j^2 L*)^M e^{-t_j^2 L*} f, t_j^2 L e^{-t_j^2 L} g>.
Complex duality_pair(const Semigroup& sg, const ScalarField& f, const ScalarField& g, int M, const TimeGrid& times);

struct JohnNirenbergTable {
  std::vector<double> p;
  std::vector<double> norms;
  Eigen::MatrixXd ratios;  // norms[i] / norms[j]; 1 when both vanish
};
JohnNirenbergTable john_nirenberg_compare(const Semigroup& sg, const ScalarField& f, int M,
                                          const std::vector<double>& p_list);

/// variant,M,p,corner0,corner1,side,value
std::string to_csv(const BmoReport& r);
/// centre,x0[,x1],radius,mass,ratio
std::string to_csv(const CarlesonReport& r, const Grid& g);
Json summary_json(const BmoReport& r);
Json summary_json(const CarlesonReport& r, const Grid& g);

}  // namespace hardy
