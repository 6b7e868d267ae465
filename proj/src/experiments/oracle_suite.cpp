#include "hardy/oracle_suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "hardy/corpus.hpp"
#include "hardy/decomposition.hpp"
#include "hardy/error.hpp"
#include "hardy/gaffney.hpp"
#include "hardy/riesz.hpp"
#include "hardy/spaces.hpp"
#include "oracle/brute.hpp"

namespace hardy {

namespace {

using oracle::Dense;

// Tolerance classes.
constexpr double kSemigroupTol = 1e-8;
constexpr double kSolveTol = 1e-10;
constexpr double kQuadratureTol = 1e-6;
constexpr double kBruteTol = 1e-9;

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double s = b.norm();
  return s > 0.0 ? (a - b).norm() / s : a.norm();
}

struct Env {
  Grid g;
  CoefficientField a;
  Semigroup sg;
  oracle::DenseCalculus dense;
  std::mt19937_64 rng{2024};
  std::vector<OracleCheck>* out;
  std::string suite;

  Env(const Grid& grid, const CoefficientField& coeff)
      : g(grid), a(coeff), sg(assemble_operator(grid, coeff)), dense(grid, coeff) {}

  void record(const std::string& name, double measured, double tol) {
    out->push_back({suite, name, measured, tol, std::isfinite(measured) && measured <= tol});
  }

  CVector mean_zero() { return oracle::random_mean_zero(g.node_count(), rng); }

  // Node sets along axis 0: first quarter and the quarter half way round.
  std::vector<Index> quarter(int which) const {
    std::vector<Index> s;
    const int n = g.size(0);
    for (Index v = 0; v < g.node_count(); ++v) {
      const int x = g.coords(v)[0];
      if (x >= which * n / 4 && x < (which + 1) * n / 4) s.push_back(v);
    }
    return s;
  }

  CVector dense_solve(const Dense& M, const CVector& f) const { return M.partialPivLu().solve(f); }
  Dense identity() const { return Dense::Identity(g.node_count(), g.node_count()); }
};

oracle::Mag dense_heat_power_mag(const Env& e, const CVector& f, const TimeGrid& tg, int K) {
  oracle::Mag m(e.g.node_count(), tg.count());
  for (int j = 0; j < tg.count(); ++j) {
    const double s = tg[j] * tg[j];
    CVector u = e.dense.heat(s, f);
    for (int k = 0; k < K; ++k) u = s * (e.dense.L * u);
    m.col(j) = u.cwiseAbs2();
  }
  return m;
}

// ---- grid_operator ----

void suite_grid_operator(Env& e) {
  const Dense lib = Dense(assemble_operator(e.g, e.a).matrix());
  const Dense ref = oracle::operator_matrix(e.g, e.a);
  e.record("assembly_matches_dense", (lib - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-12);

  // Measured constants against per-cell Hermitian-part eigenvalues.
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const int d = e.g.dim();
  for (const auto& A : e.a.matrices()) {
    const Eigen::MatrixXcd B = A.topLeftCorner(d, d);
    const Eigen::MatrixXcd H = (B + B.adjoint()) / 2.0;
    lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(H).eigenvalues().minCoeff());
    hi = std::max(hi, Eigen::JacobiSVD<Eigen::MatrixXcd>(B).singularValues()(0));
  }
  const auto c = check_ellipticity(e.a);
  e.record("ellipticity_constants", std::max(std::abs(c.lambda - lo), std::abs(c.Lambda - hi)), 1e-12);

  // Re<Lu,u> >= lambda ||grad u||^2.
  const Dense G = oracle::gradient_matrix(e.g);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const CVector u = e.mean_zero();
    const double form = u.dot(ref * u).real();
    const double grad = (G * u).squaredNorm();
    worst = std::max(worst, lo - form / grad);
  }
  e.record("coercivity", worst, 1e-10);
}

// ---- semigroup ----

void suite_semigroup(Env& e) {
  const Index N = e.g.node_count();
  SemigroupOptions ko;
  ko.backend = Backend::krylov;
  const Semigroup krylov(assemble_operator(e.g, e.a), ko);
  CVector delta = CVector::Zero(N);
  delta[N / 2] = 1.0 / e.g.cell_volume();
  const CVector ref_delta = e.dense.heat(0.1, delta);
  e.record("heat_krylov_point_mass", oracle::rel_err(krylov.heat(0.1, delta), ref_delta), kSemigroupTol);
  e.record("heat_default_point_mass", oracle::rel_err(e.sg.heat(0.1, delta), ref_delta), kSemigroupTol);

  const CVector f = e.mean_zero();
  const double s_small = e.g.spacing() * e.g.spacing();
  e.record("heat_small_time", oracle::rel_err(e.sg.heat(s_small, f), e.dense.heat(s_small, f)), kSemigroupTol);

  for (int K : {1, 2}) {
    const double s = 0.25 * 0.25;
    CVector ref = e.dense.heat(s, f);
    for (int k = 0; k < K; ++k) ref = s * (e.dense.L * ref);
    e.record("heat_power_K" + std::to_string(K), oracle::rel_err(e.sg.heat_power_family({s}, K, f)[0], ref),
             kSemigroupTol);
  }

  const double t = 0.3;
  e.record("resolvent_vs_lu", oracle::rel_err(e.sg.resolvent(t, f), e.dense_solve(e.identity() + t * e.dense.L, f)),
           kSolveTol);
  const Dense shifted = e.dense.L + e.dense.P;
  const CVector once = e.dense_solve(shifted, f);
  e.record("neg_power_2_vs_lu", oracle::rel_err(e.sg.neg_power(2, f), e.dense_solve(shifted, once)), kSolveTol);
  e.record("poisson_vs_dense_root", oracle::rel_err(e.sg.poisson(0.4, f), e.dense.poisson(0.4, f)), kQuadratureTol);

  if (e.g.periodic()) {
    const CVector one = CVector::Ones(N);
    double err = (e.sg.heat(0.7, one) - one).cwiseAbs().maxCoeff();
    err = std::max(err, (e.sg.resolvent(0.7, one) - one).cwiseAbs().maxCoeff());
    err = std::max(err, (e.sg.poisson(0.7, one) - one).cwiseAbs().maxCoeff());
    e.record("constants_conserved", err, kSemigroupTol);
  }
}

// ---- gaffney ----

void suite_gaffney(Env& e) {
  const auto E = e.quarter(0), F = e.quarter(2);
  const double d = set_distance(e.g, E, F);
  const TimeGrid tg(d * d / 64, d * d, 16);
  CVector f = CVector::Zero(e.g.node_count());
  for (Index x : E) f[x] = 1.0;
  f /= lp_norm(f, e.g, 2.0);
  auto on_F = [&](const std::vector<CVector>& comps) {
    double s = 0.0;
    for (const auto& c : comps)
      for (Index x : F) s += std::norm(c[x]);
    return std::sqrt(s * e.g.cell_volume());
  };
  std::map<GaffneyFamily, std::function<std::vector<CVector>(double)>> refs{
      {GaffneyFamily::heat, [&](double t) { return std::vector<CVector>{e.dense.heat(t, f)}; }},
      {GaffneyFamily::t_heat_deriv, [&](double t) { return std::vector<CVector>{t * (e.dense.L * e.dense.heat(t, f))}; }},
      {GaffneyFamily::grad_heat,
       [&](double t) {
         auto g = e.dense.grad(e.dense.heat(t, f));
         for (auto& c : g) c *= std::sqrt(t);
         return g;
       }},
      {GaffneyFamily::resolvent,
       [&](double t) { return std::vector<CVector>{e.dense_solve(e.identity() + t * e.dense.L, f)}; }},
      {GaffneyFamily::grad_resolvent, [&](double t) {
         auto g = e.dense.grad(e.dense_solve(e.identity() + t * e.dense.L, f));
         for (auto& c : g) c *= std::sqrt(t);
         return g;
       }}};
  for (const auto& [fam, ref] : refs) {
    const auto prof = gaffney_profile(e.sg, fam, E, F, tg);
    double worst = 0.0;
    for (int j = 0; j < tg.count(); ++j) {
      const double r = on_F(ref(tg[j]));
      // Relative, floored at 1e-6 of ||f|| = 1: at t = d^2/64 the norm is ~1e-7
      // and the spectral sum's roundoff alone is ~1e-15.
      worst = std::max(worst, std::abs(prof.measured_norms[0][j] - r) / std::max(r, 1e-6));
    }
    e.record("profile_" + to_string(fam), worst, kSemigroupTol);
  }
}

// ---- functionals ----

void suite_functionals(Env& e) {
  const TimeGrid tg = TimeGrid::standard(e.g, 16);
  const CVector f = e.mean_zero();
  const ScalarField F(e.g, f);
  const oracle::Mag H = dense_heat_power_mag(e, f, tg, 1);

  e.record("square_function_heat",
           rel(real_values(square_function(e.sg, F, ConeSpec{}, SquareKind::heat, 1, tg)), oracle::cone_sum(e.g, tg, H, 1.0)),
           kBruteTol);
  e.record("square_function_heat_aperture_2",
           rel(real_values(square_function(e.sg, F, ConeSpec{2.0}, SquareKind::heat, 1, tg)),
               oracle::cone_sum(e.g, tg, H, 2.0)),
           kBruteTol);
  oracle::Mag plain(e.g.node_count(), tg.count()), poisson(e.g.node_count(), tg.count());
  for (int j = 0; j < tg.count(); ++j) {
    plain.col(j) = e.dense.heat(tg[j] * tg[j], f).cwiseAbs2();
    poisson.col(j) = e.dense.poisson(tg[j], f).cwiseAbs2();
  }
  e.record("nontangential_heat",
           rel(real_values(nontangential_max(e.sg, F, MaximalKind::heat, 1.0, 1, tg)),
               oracle::cone_max(e.g, tg, plain, 1.0, 1.0)),
           kBruteTol);
  const auto Hh = real_values(nontangential_max(e.sg, F, MaximalKind::heat_star, 1.0, 1, tg));
  e.record("star_maximal_heat", rel(Hh, oracle::star_max(e.g, tg, plain)), kBruteTol);
  e.record("nontangential_poisson",
           rel(real_values(nontangential_max(e.sg, F, MaximalKind::poisson, 1.0, 1, tg)),
               oracle::cone_max(e.g, tg, poisson, 1.0, 1.0)),
           kQuadratureTol);

  Eigen::VectorXd gh = Eigen::VectorXd::Zero(e.g.node_count());
  for (int j = 0; j < tg.count(); ++j) gh += tg.weights()[j] * H.col(j);
  e.record("vertical_g_h",
           rel(real_values(vertical_square_function(e.sg, F, VerticalKind::g_h, 1, tg)), gh.cwiseSqrt()), kBruteTol);
  e.record("hl_maximal", rel(real_values(hl_maximal(F)), oracle::hl_max(e.g, f)), kBruteTol);
}

// ---- decomposition ----

void suite_decomposition(Env& e) {
  for (int M : {1, 2, 3}) {
    // C_M int_0^inf (t^2 mu)^{M+2} e^{-(M+2) t^2 mu} dt / t = 1 for every mu > 0; take mu = 1.
    const double a = M + 2;
    auto integrand = [a](double t) {
      const double u = t * t;
      return u > 0.0 ? std::exp(a * (std::log(u) - u)) / t : 0.0;
    };
    boost::math::quadrature::exp_sinh<double> q;
    const double integral = q.integrate(integrand, 1e-15);
    e.record("calderon_constant_M" + std::to_string(M), std::abs(calderon_constant(M) * integral - 1.0), 1e-10);
  }

  // A block of the lattice as the open set.
  std::vector<Index> O;
  std::vector<char> in(e.g.node_count(), 0);
  for (Index v = 0; v < e.g.node_count(); ++v) {
    const auto c = e.g.coords(v);
    bool inside = c[0] >= e.g.size(0) / 4 && c[0] < e.g.size(0) / 2 + 3;
    if (e.g.dim() == 2) inside = inside && c[1] >= 2 && c[1] < e.g.size(1) / 2;
    if (inside) {
      O.push_back(v);
      in[v] = 1;
    }
  }
  for (double gamma : {0.5, 0.75}) {
    const auto exp = density_expansion(e.g, O, gamma);
    CVector chi = CVector::Zero(e.g.node_count());
    for (Index x : O) chi[x] = 1.0;
    const Eigen::VectorXd Mchi = oracle::hl_max(e.g, chi);
    std::vector<char> got(e.g.node_count(), 0);
    for (Index x : exp.nodes) got[x] = 1;
    int mismatch = 0;
    for (Index x = 0; x < e.g.node_count(); ++x) mismatch += (got[x] != 0) != (Mchi[x] > 1.0 - gamma) ? 1 : 0;
    e.record("density_expansion_gamma_" + format_number(gamma), mismatch, 0.0);
  }

  // Whitney comparability, exhaustively.
  const auto w = whitney_decompose(O, e.g);
  std::vector<int> hits(e.g.node_count(), 0);
  int violations = 0;
  for (const auto& q : w.cubes) {
    double dist = std::numeric_limits<double>::infinity();
    for (Index x : q.nodes()) {
      ++hits[x];
      for (Index z = 0; z < e.g.node_count(); ++z)
        if (!in[z]) dist = std::min(dist, e.g.distance(x, z));
    }
    if (whitney_c1 * dist > q.sidelength() * (1 + 1e-12) || q.sidelength() > whitney_c2 * dist * (1 + 1e-12)) ++violations;
  }
  for (Index x = 0; x < e.g.node_count(); ++x) violations += (hits[x] > 0) != (in[x] == 1) || hits[x] > 1 ? 1 : 0;
  e.record("whitney_exhaustive", violations, 0.0);

  // Nested levels: tents cover every space-time cell exactly once.
  std::vector<std::vector<Index>> levels(1);
  for (Index v = 0; v < e.g.node_count(); ++v) levels[0].push_back(v);
  levels.push_back(O);
  std::vector<Index> inner;
  for (Index x : O)
    if (e.g.coords(x)[0] < e.g.size(0) / 2 - 2) inner.push_back(x);
  levels.push_back(inner);
  levels.push_back({});
  const TimeGrid tg(e.g.spacing() / 8, 4 * e.g.extent(), 32);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(e.g.node_count(), tg.count());
  for (std::size_t k = 0; k + 1 < levels.size(); ++k)
    for (const auto& q : whitney_decompose(levels[k], e.g).cubes) {
      const auto tent = build_truncated_tents(e.g, levels[k], levels[k + 1], q);
      for (Index x = 0; x < e.g.node_count(); ++x)
        for (int j = 0; j < tg.count(); ++j) count(x, j) += tent.contains(x, tg[j]) ? 1 : 0;
    }
  e.record("tent_partition", (count.array() != 1).count(), 0.0);

  const ScalarField f = corpus_element(e.sg, 5, 1, CorpusKind::bumps);
  const auto dec = molecular_decompose(e.sg, f, TimeGrid::resolving(e.g, 64));
  e.record("reconstruction", dec.relative_residual, 1e-3);
  e.record("molecules_validate", dec.all_valid ? 0.0 : 1.0, 0.0);
}

// ---- spaces ----

void suite_spaces(Env& e) {
  const CVector f = e.mean_zero();
  const ScalarField F(e.g, f);
  for (int M : {1, 2}) {
    for (BmoVariant v : {BmoVariant::heat, BmoVariant::resolvent}) {
      const auto rep = bmo_norm(e.sg, F, M, v);
      std::map<int, CVector> diff;
      double worst = 0.0;
      for (const auto& cv : rep.per_cube) {
        const int c = cv.cube.count();
        if (!diff.count(c)) {
          const double s = cv.cube.sidelength() * cv.cube.sidelength();
          CVector u = f;
          for (int r = 0; r < M; ++r)
            u -= v == BmoVariant::heat ? e.dense.heat(s, u) : e.dense_solve(e.identity() + s * e.dense.L, u);
          diff[c] = u;
        }
        double sum = 0.0;
        const auto nodes = cv.cube.nodes();
        for (Index x : nodes) sum += std::norm(diff[c][x]);
        const double ref = std::sqrt(sum / nodes.size());
        worst = std::max(worst, std::abs(cv.value - ref) / (ref + 1e-300));
      }
      e.record("bmo_" + to_string(v) + "_M" + std::to_string(M), worst, kBruteTol);
    }
  }

  // Carleson masses by enumerating every ball, node and sample.
  const TimeGrid tg = TimeGrid::standard(e.g, 16);
  const oracle::Mag mag = dense_heat_power_mag(e, f, tg, 1);
  const auto rep = carleson_functional(e.sg, F, 1, tg);
  const auto balls = ball_family(e.g);
  double worst = 0.0;
  for (std::size_t b = 0; b < balls.size(); ++b) {
    double mass = 0.0;
    int count = 0;
    for (Index y = 0; y < e.g.node_count(); ++y) {
      if (!(e.g.distance(balls[b].centre, y) < balls[b].radius)) continue;
      ++count;
      double depth = std::numeric_limits<double>::infinity();
      for (Index z = 0; z < e.g.node_count(); ++z)
        if (!(e.g.distance(balls[b].centre, z) < balls[b].radius)) depth = std::min(depth, e.g.distance(y, z));
      for (int j = 0; j < tg.count(); ++j)
        if (tg[j] <= depth) mass += e.g.cell_volume() * tg.weights()[j] * mag(y, j);
    }
    const double ratio = mass / (count * e.g.cell_volume());
    worst = std::max(worst, std::abs(rep.per_ball[b].ratio - ratio) / (ratio + 1e-300));
  }
  e.record("carleson_enumeration", worst, kBruteTol);

  const TimeGrid res = TimeGrid::resolving(e.g, 96);
  double dual = 0.0;
  for (int i = 0; i < 5; ++i) {
    const ScalarField a(e.g, e.mean_zero()), b(e.g, e.mean_zero());
    const double scale = lp_norm(a.values, e.g, 2.0) * lp_norm(b.values, e.g, 2.0);
    dual = std::max(dual, std::abs(duality_pair(e.sg, a, b, 1, res) - inner(a.values, b.values, e.g)) / scale);
  }
  e.record("duality_pairing", dual, kQuadratureTol);
}

// ---- riesz ----

void suite_riesz(Env& e) {
  const CVector f = e.mean_zero();
  const CVector u = (e.dense.root + e.dense.P).partialPivLu().solve(f);
  const auto ref = e.dense.grad(u);
  const VectorField r = riesz_apply(e.sg, ScalarField(e.g, f), 64);
  double worst = 0.0;
  for (int k = 0; k < e.g.dim(); ++k) worst = std::max(worst, oracle::rel_err(r.components[k], ref[k]));
  e.record("riesz_vs_dense_root", worst, kQuadratureTol);
  const CVector twice = riesz_inverse_sqrt(e.sg, riesz_inverse_sqrt(e.sg, f));
  e.record("inverse_sqrt_squared", oracle::rel_err(twice, e.dense_solve(e.dense.L + e.dense.P, f)), kQuadratureTol);
}

const std::vector<std::pair<std::string, void (*)(Env&)>>& suites() {
  static const std::vector<std::pair<std::string, void (*)(Env&)>> s{
      {"grid_operator", suite_grid_operator}, {"semigroup", suite_semigroup}, {"gaffney", suite_gaffney},
      {"functionals", suite_functionals},     {"decomposition", suite_decomposition},
      {"spaces", suite_spaces},               {"riesz", suite_riesz}};
  return s;
}

}  // namespace

bool OracleReport::pass() const { return failures() == 0 && !checks.empty(); }

int OracleReport::failures() const {
  int n = 0;
  for (const auto& c : checks) n += c.pass ? 0 : 1;
  return n;
}

std::vector<std::string> oracle_suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : suites()) out.push_back(name);
  return out;
}

OracleReport run_oracle_suite(const Grid& g, const CoefficientField& a, const std::vector<std::string>& selection,
                              const std::string& label) {
  const auto names = oracle_suite_names();
  for (const auto& s : selection)
    if (std::find(names.begin(), names.end(), s) == names.end()) throw InvalidArgument("unknown oracle suite: " + s);
  if (g.node_count() > 1024) throw InvalidArgument("dense oracles need at most 1024 nodes");
  if (selection.empty()) throw InvalidArgument("empty suite selection");
  const std::vector<std::string>& chosen = selection;

  const auto start = std::chrono::steady_clock::now();
  OracleReport r;
  r.label = label;
  Env env(g, a);
  env.out = &r.checks;
  for (const auto& [name, fn] : suites()) {
    if (std::find(chosen.begin(), chosen.end(), name) == chosen.end()) continue;
    env.suite = name;
    fn(env);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

Json to_json(const OracleReport& r) {
  Json j;
  j["label"] = r.label;
  j["pass"] = r.pass();
  j["failures"] = r.failures();
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"suite", c.suite}, {"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  j["checks"] = checks;
  return j;
}

}  // namespace hardy
