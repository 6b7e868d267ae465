#pragma once

#include <string>
#include <vector>

#include "hardy/functionals.hpp"
#include "hardy/io.hpp"

namespace hardy {

/// C_M with C_M * int_0^inf (t^2 mu)^{M+2} e^{-(M+2) t^2 mu} dt/t = 1, i.e.
/// 2 (M+2)^{M+2} / Gamma(M+2).
double calderon_constant(int M);

/// min over nodes z outside `set` of |x - z| for every node x; +inf everywhere
/// when the set is the whole grid.
Eigen::VectorXd distance_to_complement(const Grid& g, const std::vector<Index>& set);

struct DensityExpansion {
  std::vector<Index> nodes;  // O* = {hl_maximal(indicator of O) > 1 - gamma}
  double growth = 1.0;       // |O*| / |O|, 1 for empty O
};
DensityExpansion density_expansion(const Grid& g, const std::vector<Index>& set, double gamma);

// Comparability constants c1 dist <= l(Q) <= c2 dist, with dist measured
// between node centres. A boundary node sits at distance h from the
// complement, so c2 < 1 would leave it uncovered.
inline constexpr double whitney_c1 = 0.125;
inline constexpr double whitney_c2 = 1.0;

struct WhitneySet {
  std::vector<Cube> cubes;
  std::vector<Index> parent_open_set;
  int overlap_bound = 1;
  /// The set was the whole grid: the cubes are the coarsest dyadic tiling and
  /// no comparability holds.
  bool whole_grid = false;
};

/// Maximal dyadic cubes (aligned blocks of 2^j nodes lying inside the grid)
/// with l(Q) <= c2 dist(Q, complement). They are disjoint and cover the set.
WhitneySet whitney_decompose(const std::vector<Index>& open_set, const Grid& grid);
/// min over nodes of Q of dist_map.
double cube_distance(const Cube& q, const Eigen::VectorXd& dist_map);

/// {(x, t) : dist(x, complement of base) >= t}.
class TentRegion {
 public:
  TentRegion() = default;
  TentRegion(const Grid& g, const std::vector<Index>& base);
  bool contains(Index x, double t) const { return dist_[x] >= t; }
  const Eigen::VectorXd& distances() const { return dist_; }

 private:
  Eigen::VectorXd dist_;
};

/// (Q x (0, inf)) intersected with tent(O_k*) minus tent(O_{k+1}*).
struct TruncatedTent {
  Cube cube;
  TentRegion upper;
  TentRegion lower;

  bool contains(Index x, double t) const { return cube.contains(x) && upper.contains(x, t) && !lower.contains(x, t); }
  /// Nodes of the slice at time t.
  std::vector<Index> slice(double t) const;
};
TruncatedTent build_truncated_tents(const Grid& g, const std::vector<Index>& level_k, const std::vector<Index>& level_k1,
                                    const Cube& q);

struct MoleculeParams {
  double p = 2.0;
  double eps = 1.0;
  int M = 1;
};

struct AnnulusCheck {
  int annulus;
  int power;  // k in (l(Q)^2 L)^{-k}
  double measured;
  double bound;
  bool pass;
};

struct MoleculeReport {
  std::vector<AnnulusCheck> rows;
  bool pass = true;
  double worst_ratio = 0.0;  // max measured / bound
};

struct Molecule {
  ScalarField field;
  Cube cube;
  MoleculeParams params;
  double normalization = 1.0;  // the raw construction was divided by this
  MoleculeReport report;
};

enum class MoleculeKind { heat, resolvent };
std::string to_string(MoleculeKind k);
MoleculeKind molecule_kind_from_string(const std::string& s);

/// Size and cancellation table for m on the annuli S_i(Q), powers 0..max_power.
MoleculeReport molecule_report(const Semigroup& sg, const ScalarField& m, const Cube& q, const MoleculeParams& params,
                               int max_power);
MoleculeReport validate_molecule(const Semigroup& sg, const Molecule& m);

/// (l^2 L)^M e^{-l^2 L} f or (I - (I + l^2 L)^{-1})^M f, divided by the
/// smallest constant that makes every bound hold.
Molecule make_molecule(const Semigroup& sg, const ScalarField& f_on_q, const Cube& q, MoleculeKind kind,
                       const MoleculeParams& params = {});

/// sup_i 2^{i(n - n/p + eps)} |Q|^{1 - 1/p} sum_{v=0}^M ||(l^2 L)^{-v} mu||_{L^p(S_i Q)}.
double molecular_norm(const Semigroup& sg, const ScalarField& mu, const Cube& q, const MoleculeParams& params);

struct DecompositionOptions {
  MoleculeParams molecule;
  double gamma = 0.5;
};

struct DecompositionLevel {
  int k;
  std::vector<Index> set;       // O_k = {S_h f > 2^k}
  DensityExpansion expanded;    // O_k*
  WhitneySet whitney;
};

struct DecompositionTerm {
  int level;
  int index;
  double weight;  // C_M 2^k |Q|
  Cube cube;
  ScalarField molecule;          // raw m_k^j(N)
  double required_normalization;  // worst bound ratio of the raw molecule
  bool valid = false;            // passes after the global normalization
};

struct MolecularDecomposition {
  Grid grid;
  DecompositionOptions options;
  TimeGrid times;
  double calderon = 0.0;
  ScalarField square;  // S_h f on the same time grid
  std::vector<DecompositionLevel> levels;
  std::vector<DecompositionTerm> terms;
  ScalarField residual;  // f - sum weight * molecule
  double residual_norm = 0.0;
  double relative_residual = 0.0;
  double weight_sum = 0.0;
  double normalization = 1.0;  // max required_normalization
  bool all_valid = true;
};

/// Level sets of S_h f, density expansion, Whitney cubes and truncated tents,
/// then every m_k^j by log-time quadrature of the Calderon formula.
MolecularDecomposition molecular_decompose(const Semigroup& sg, const ScalarField& f, const TimeGrid& times,
                                           const DecompositionOptions& options = {});

struct H1Estimate {
  double weight_sum = 0.0;
  double f_l1 = 0.0;
  double estimate = 0.0;  // weight_sum + ||f||_1
  double square_l1 = 0.0;  // ||S_h f||_1
};
H1Estimate h1_norm_estimate(const Semigroup& sg, const ScalarField& f, const TimeGrid& times,
                            const DecompositionOptions& options = {});
H1Estimate h1_norm_estimate(const MolecularDecomposition& d, const ScalarField& f);

Json to_json(const MolecularDecomposition& d);
/// k,j,lambda,sidelength,required_normalization,valid
std::string summary_csv(const MolecularDecomposition& d);

}  // namespace hardy
