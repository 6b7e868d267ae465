#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hardy/corpus.hpp"
#include "hardy/decomposition.hpp"
#include "hardy/io.hpp"
#include "hardy/riesz.hpp"
#include "hardy/spaces.hpp"

namespace hardy {

struct GridSpec {
  std::vector<int> sizes{64};
  double spacing = 0.0;  // 0 means 1 / sizes[0], a unit domain
  Boundary boundary = Boundary::periodic;

  Grid make() const;
};

struct CoefficientSpec {
  std::string kind = "identity";  // identity | random | file
  double lambda = 0.5;
  double Lambda = 2.0;
  std::uint64_t seed = 1;
  std::string path;

  CoefficientField make(const Grid& g) const;
};

struct TimeSpec {
  int count = 64;
  std::string window = "standard";  // standard | resolving | explicit
  double t_min = 0.0;
  double t_max = 0.0;

  TimeGrid make(const Grid& g) const;
};

struct ParameterSpec {
  int M = 1;
  double p = 2.0;
  double eps = 1.0;
  double gamma = 0.5;
  double aperture = 1.0;  // cone aperture for S_h and S_P
  double beta = 1.0;      // cone aperture for N_h and N_P
  int quad_nodes = 64;
  std::vector<double> p_list{1.5, 2.0, 3.0};
};

struct CorpusSpec {
  int count = 20;
  std::uint64_t seed = 7;
  CorpusKind generator = CorpusKind::mixed;
};

struct Tolerances {
  double spread = 25.0;           // corpus max/min for equivalence and BMO ratios
  double riesz_spread = 10.0;
  double slope_slack = 0.2;       // commutator slopes >= M - slack
  double reconstruction = 1e-3;
  double duality = 1e-6;
  double homogeneity = 1e-9;
};

struct ExperimentConfig {
  GridSpec grid;
  CoefficientSpec coefficients;
  TimeSpec times;
  ParameterSpec parameters;
  CorpusSpec corpus;
  std::string output = "hardy-out";
  Tolerances tolerances;
  std::vector<std::string> filter;  // oracle suites; empty runs all
};

/// Missing keys keep their defaults; unknown keys and bad values throw
/// ConfigError naming the source line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& c);

/// "64" or "16x16".
GridSpec parse_grid_override(const std::string& s);
std::vector<std::string> parse_filter(const std::string& s);

/// Everything the commands share, built once from a config.
struct Context {
  ExperimentConfig config;
  Grid grid;
  CoefficientField coefficients;
  Semigroup sg;
  TimeGrid times;
  TimeGrid resolving;  // decomposition and duality window

  explicit Context(ExperimentConfig c);
  std::vector<ScalarField> corpus() const;
  MoleculeParams molecule_params() const;
};

// ---- equivalence ----

inline constexpr int kProxyCount = 5;
extern const char* const kProxyNames[kProxyCount];  // decomposition, S_h, N_h, S_P, N_P

struct ProxyValues {
  double f_l1 = 0.0;
  double raw[kProxyCount] = {};    // weight_sum, ||S_h f||_1, ...
  double value[kProxyCount] = {};  // raw + ||f||_1
  double residual = 0.0;           // relative reconstruction error of the decomposition
  double normalization = 0.0;
  bool molecules_valid = false;
};

ProxyValues proxy_values(const Context& ctx, const ScalarField& f);

struct PairStat {
  int a, b;
  double min, max, median, spread;
};

struct EquivalenceReport {
  std::vector<ProxyValues> rows;
  std::vector<PairStat> pairs;
  double worst_spread = 0.0;
};

/// Throws InvalidArgument("empty corpus") when the corpus is empty.
EquivalenceReport equivalence_experiment(const Context& ctx, const std::vector<ScalarField>& corpus);
std::string equivalence_values_csv(const EquivalenceReport& r);
std::string equivalence_pairs_csv(const EquivalenceReport& r);

// ---- BMO and Carleson ----

struct BmoRow {
  double heat = 0.0;
  double resolvent = 0.0;
  std::vector<double> p_norms;  // one per parameters.p_list entry
  double carleson = 0.0;
};

/// Spread of a list of ratios; degenerate entries (0/0) are skipped.
struct RatioSpread {
  double min = 0.0;
  double max = 0.0;
  double spread = 1.0;
  int used = 0;
  bool degenerate() const { return used == 0; }
};
RatioSpread ratio_spread(const std::vector<double>& num, const std::vector<double>& den);

struct BmoExperiment {
  std::vector<BmoRow> rows;
  RatioSpread heat_resolvent;
  std::vector<RatioSpread> p_vs_2;  // norm_p / norm_heat for each p
  RatioSpread john_nirenberg;       // over every p at once
  RatioSpread carleson_bmo2;
  double molecule_pairing = 0.0;    // max |<f, m>| / ||f||_BMO(L*) over corpus x molecules
  double duality_error = 0.0;       // max |pair - <f, g>| / (||f|| ||g||) on random pairs
};

BmoExperiment bmo_experiment(const Context& ctx, const std::vector<ScalarField>& corpus, int duality_pairs = 20);
std::string bmo_csv(const Context& ctx, const BmoExperiment& e);

// ---- Riesz ----

/// Gaussian noise on random dyadic cubes, mean-zero on its cube, L2-normalized
/// to |Q|^{-1/2}; alternating heat and resolvent kinds.
std::vector<Molecule> molecule_corpus(const Semigroup& sg, int count, std::uint64_t seed, const MoleculeParams& params);

struct CommutatorStudy {
  CommutatorTarget target;
  int M;
  CommutatorSweep sweep;
};

struct RieszExperiment {
  RieszReport report;
  std::vector<CommutatorStudy> commutators;
  double worst_slope_margin = 0.0;  // min over studies of slope - M
};

/// Commutator sweeps on E = the first n/16 nodes along axis 0 and F the block
/// half way round, t in [1e-4, 1e-2] dist^2.
RieszExperiment riesz_experiment(const Context& ctx);
std::string commutator_csv(const RieszExperiment& e);

// ---- commands ----

enum ExitCode { exit_ok = 0, exit_assertion = 2, exit_config = 3, exit_numerical = 4 };

std::vector<std::string> command_names();
/// Writes CSV/JSON into config.output; run metadata (timestamps) goes to
/// <command>.meta.json only. Returns an ExitCode; never throws.
int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log);

}  // namespace hardy
