#include "hardy/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <lapacke.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "hardy/error.hpp"

namespace hardy {

struct Semigroup::Spectral {
  Eigen::MatrixXcd V;
  Eigen::MatrixXcd Vinv;
  CVector mu;
  Index kernel = -1;
};

struct Semigroup::Solvers {
  // L itself on Dirichlet grids; on periodic grids the last row is replaced by
  // a scaled row of ones, which pins the mean and makes the system regular.
  Eigen::SparseLU<SparseMatrix> pinned;
  double pin_scale = 1.0;
};

namespace {


SparseMatrix pinned_matrix(const DiscreteOperator& op, double scale) {
  const SparseMatrix& L = op.matrix();
  const Index n = L.rows();
  if (!op.grid().periodic()) return L;
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(L.nonZeros() + n);
  for (Index c = 0; c < L.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(L, c); it; ++it)
      if (it.row() != n - 1) trip.emplace_back(it.row(), it.col(), it.value());
  for (Index c = 0; c < n; ++c) trip.emplace_back(n - 1, c, scale);
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

}  // namespace

Semigroup::Semigroup(DiscreteOperator op, SemigroupOptions options)
    : Semigroup(std::move(op), options, nullptr) {
  const Index n = op_.grid().node_count();
  const bool want_spectral = options_.backend == Backend::spectral ||
                             (options_.backend == Backend::automatic && n <= options_.spectral_limit);
  if (!want_spectral) return;

  auto sp = std::make_shared<Spectral>();
  Eigen::MatrixXcd dense = Eigen::MatrixXcd(op_.matrix());
  const lapack_int nn = static_cast<lapack_int>(n);
  auto* a = reinterpret_cast<lapack_complex_double*>(dense.data());
  if (op_.hermitian()) {
    Eigen::VectorXd w(n);
    if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', nn, a, nn, w.data()) != 0)
      throw NumericalError("hermitian eigensolver failed");
    sp->V = std::move(dense);
    sp->Vinv = sp->V.adjoint();
    sp->mu = w.cast<Complex>();
  } else {
    sp->V.resize(n, n);
    sp->mu.resize(n);
    if (LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', nn, a, nn, reinterpret_cast<lapack_complex_double*>(sp->mu.data()),
                      nullptr, nn, reinterpret_cast<lapack_complex_double*>(sp->V.data()), nn) != 0)
      throw NumericalError("eigensolver failed");
    sp->Vinv = sp->V.partialPivLu().inverse();
  }
  if (op_.kernel_dim() == 1) {
    Index k = 0;
    sp->mu.cwiseAbs().minCoeff(&k);
    sp->kernel = k;
    sp->mu[k] = 0.0;
  }
  spectral_ = std::move(sp);
}

Semigroup::Semigroup(DiscreteOperator op, SemigroupOptions options, std::shared_ptr<const Spectral> spectral)
    : op_(std::move(op)), options_(options), bounds_(op_.spectral_bounds()), spectral_(std::move(spectral)) {
  if (options_.krylov_dim < 2) throw InvalidArgument("krylov dimension must be at least 2");
  auto sv = std::make_shared<Solvers>();
  const SparseMatrix& L = op_.matrix();
  double diag = 0.0;
  for (Index i = 0; i < L.rows(); ++i) diag += std::abs(L.coeff(i, i));
  sv->pin_scale = diag / static_cast<double>(L.rows());
  sv->pinned.compute(pinned_matrix(op_, sv->pin_scale));
  if (sv->pinned.info() != Eigen::Success) throw NumericalError("singular operator factorization");
  solvers_ = std::move(sv);
}

Semigroup Semigroup::adjoint() const {
  std::shared_ptr<const Spectral> sp;
  if (spectral_) {
    auto a = std::make_shared<Spectral>();
    a->V = spectral_->Vinv.adjoint();
    a->Vinv = spectral_->V.adjoint();
    a->mu = spectral_->mu.conjugate();
    a->kernel = spectral_->kernel;
    sp = std::move(a);
  }
  return Semigroup(op_.adjoint(), options_, std::move(sp));
}

const CVector& Semigroup::eigenvalues() const {
  if (!spectral_) throw InvalidArgument("no spectral decomposition on this engine");
  return spectral_->mu;
}

CVector Semigroup::apply_symbol(const std::function<Complex(Complex, bool)>& phi, const CVector& f) const {
  if (!spectral_) throw InvalidArgument("no spectral decomposition on this engine");
  CVector c = spectral_->Vinv * f;
  for (Index k = 0; k < c.size(); ++k) c[k] *= phi(spectral_->mu[k], k == spectral_->kernel);
  return spectral_->V * c;
}

CVector Semigroup::kernel_part(const CVector& f) const {
  if (op_.kernel_dim() == 0) return CVector::Zero(f.size());
  return CVector::Constant(f.size(), mean(f));
}

CVector Semigroup::require_range(const CVector& f) const {
  if (op_.kernel_dim() == 0) return f;
  const Complex m = mean(f);
  const double scale = f.norm() / std::sqrt(static_cast<double>(f.size()));
  if (std::abs(m) > 1e-10 * scale) throw KernelComponent("kernel component: input is not mean-zero");
  return f - CVector::Constant(f.size(), m);
}

CVector Semigroup::heat(double s, const CVector& f) const {
  if (s < 0.0) throw InvalidArgument("heat time must be nonnegative");
  if (f.size() != op_.grid().node_count()) throw InvalidArgument("heat: field size does not match grid");
  if (s == 0.0) return f;
  if (spectral_) return apply_symbol([s](Complex mu, bool) { return std::exp(-s * mu); }, f);
  return krylov_heat(s, f);
}

std::vector<CVector> Semigroup::heat_family(const std::vector<double>& times, const CVector& f) const {
  std::vector<CVector> out(times.size());
  for (double s : times)
    if (s < 0.0) throw InvalidArgument("heat time must be nonnegative");
  if (spectral_) {
    const CVector c = spectral_->Vinv * f;
    for (std::size_t j = 0; j < times.size(); ++j) {
      CVector cj = (c.array() * (-times[j] * spectral_->mu.array()).exp()).matrix();
      out[j] = spectral_->V * cj;
    }
    return out;
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  CVector cur = f;
  double now = 0.0;
  for (auto j : order) {
    cur = krylov_heat(times[j] - now, cur);
    now = times[j];
    out[j] = cur;
  }
  return out;
}

std::vector<CVector> Semigroup::heat_power_family(const std::vector<double>& times, int K, const CVector& f) const {
  if (K < 0 || K > options_.max_power) throw InvalidArgument(fmt::format("power must lie in [0, {}]", options_.max_power));
  if (!spectral_ || K == 0) {
    auto u = heat_family(times, f);
    for (std::size_t j = 0; j < u.size(); ++j)
      for (int k = 0; k < K; ++k) u[j] = times[j] * apply(u[j]);
    return u;
  }
  for (double s : times)
    if (s < 0.0) throw InvalidArgument("heat time must be nonnegative");
  const CVector c = spectral_->Vinv * f;
  std::vector<CVector> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Eigen::ArrayXcd x = times[j] * spectral_->mu.array();
    CVector cj = (c.array() * x.pow(K) * (-x).exp()).matrix();
    if (spectral_->kernel >= 0) cj[spectral_->kernel] = 0.0;
    out[j] = spectral_->V * cj;
  }
  return out;
}

CVector Semigroup::poisson_power(double t, int K, const CVector& f) const {
  if (K < 0 || K > options_.max_power) throw InvalidArgument(fmt::format("power must lie in [0, {}]", options_.max_power));
  if (t < 0.0) throw InvalidArgument("poisson time must be nonnegative");
  if (K == 0) return poisson(t, f);
  if (t == 0.0) return CVector::Zero(f.size());
  const double s = t * t;
  if (spectral_) {
    const HeatQuadrature q = subordination_rule(t, bounds_, options_.poisson_nodes);
    return apply_symbol(
        [&](Complex mu, bool kern) { return kern ? Complex(0.0) : std::pow(s * mu, K) * q.symbol(mu, false); }, f);
  }
  CVector u = poisson(t, f);
  for (int k = 0; k < K; ++k) u = s * apply(u);
  return u;
}

CVector Semigroup::krylov_heat(double s, const CVector& f) const {
  if (s == 0.0) return f;
  const SparseMatrix& A = op_.matrix();
  const Index n = f.size();
  const int m = static_cast<int>(std::min<Index>(options_.krylov_dim, n));
  const double anorm = bounds_.high;
  const double tol = options_.krylov_tol;

  CVector w = f;
  double done = 0.0;
  double tau = std::min(s, 0.5 * m / anorm);
  int steps = 0;
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m + 1);

  while (done < s) {
    const double beta = w.norm();
    if (beta == 0.0) break;
    V.col(0) = w / beta;
    H.setZero();
    int mm = m;
    bool happy = false;
    for (int j = 0; j < m; ++j) {
      CVector p = A * V.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const Complex h = V.col(i).dot(p);
          H(i, j) += h;
          p -= h * V.col(i);
        }
      }
      const double hn = p.norm();
      if (hn <= 1e-13 * anorm) {
        happy = true;
        mm = j + 1;
        break;
      }
      H(j + 1, j) = hn;
      V.col(j + 1) = p / hn;
    }

    for (;;) {
      if (++steps > options_.krylov_max_steps)
        throw NumericalError(fmt::format("krylov heat did not converge within {} steps", options_.krylov_max_steps));
      tau = std::min(tau, s - done);
      Eigen::MatrixXcd E;
      double err = 0.0;
      if (happy) {
        E = (Eigen::MatrixXcd(H.topLeftCorner(mm, mm)) * Complex(-tau)).exp();
      } else {
        Eigen::MatrixXcd X = H;  // Hessenberg block plus h_{m+1,m} e_m^T as last row
        E = (X * Complex(-tau)).exp();
        err = beta * std::abs(E(m, 0));
      }
      const double allowed = tol * beta * std::max(tau / s, 1e-3);
      if (happy || err <= allowed) {
        w = beta * (V.leftCols(mm) * E.col(0).head(mm));
        done += tau;
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(allowed / err, 1.0 / (m + 1)), 0.2, 5.0);
        tau *= grow;
        break;
      }
      tau *= std::clamp(0.9 * std::pow(allowed / err, 1.0 / (m + 1)), 0.1, 0.9);
    }
  }
  return w;
}

CVector Semigroup::resolvent(double s, const CVector& f) const {
  if (s < 0.0) throw InvalidArgument("resolvent parameter must be nonnegative");
  if (s == 0.0) return f;
  const Index n = f.size();
  SparseMatrix I(n, n);
  I.setIdentity();
  SparseMatrix M = I + Complex(s) * op_.matrix();
  M.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu(M);
  if (lu.info() != Eigen::Success) throw NumericalError("resolvent factorization failed");
  CVector x = lu.solve(f);
  x += lu.solve(CVector(f - M * x));
  return x;
}

CVector Semigroup::neg_power(int k, const CVector& f) const {
  if (k < 1) throw InvalidArgument("negative power needs k >= 1");
  if (k > options_.max_power) throw InvalidArgument(fmt::format("negative power capped at {}", options_.max_power));
  const bool periodic = op_.kernel_dim() == 1;
  const Index n = f.size();
  const auto& lu = solvers_->pinned;
  const double pin = solvers_->pin_scale;
  CVector x = require_range(f);
  for (int step = 0; step < k; ++step) {
    CVector b = x;
    if (periodic) b[n - 1] = 0.0;
    CVector y = lu.solve(b);
    if (lu.info() != Eigen::Success) throw NumericalError("singular solve");
    CVector r = x - op_.matrix() * y;
    if (periodic) r[n - 1] = -pin * y.sum();
    y += lu.solve(r);
    x = std::move(y);
  }
  return x;
}

CVector Semigroup::apply_quadrature(const HeatQuadrature& q, const CVector& f) const {
  if (spectral_) return apply_symbol([&q](Complex mu, bool kern) { return q.symbol(mu, kern); }, f);
  const std::vector<CVector> terms = heat_family(q.times, f);
  CVector out = CVector::Zero(f.size());
  for (std::size_t k = 0; k < terms.size(); ++k) out += q.weights[k] * terms[k];
  if (q.kernel_weight != 0.0) out += q.kernel_weight * kernel_part(f);
  return out;
}

CVector Semigroup::poisson(double t, const CVector& f, int nodes) const {
  if (t < 0.0) throw InvalidArgument("poisson time must be nonnegative");
  if (t == 0.0) return f;
  return apply_quadrature(subordination_rule(t, bounds_, nodes > 0 ? nodes : options_.poisson_nodes), f);
}

CVector Semigroup::inverse_sqrt(const CVector& f) const {
  const CVector g = require_range(f);
  if (spectral_)
    return apply_symbol([](Complex mu, bool kern) { return kern ? Complex(0.0) : 1.0 / std::sqrt(mu); }, g);
  return apply_quadrature(inverse_sqrt_rule(bounds_, options_.inverse_sqrt_nodes), g);
}

CVector Semigroup::sqrt(const CVector& f) const {
  if (spectral_) return apply_symbol([](Complex mu, bool kern) { return kern ? Complex(0.0) : std::sqrt(mu); }, f);
  return apply(inverse_sqrt(f - kernel_part(f)));
}

CVector dense_expm_apply(const DiscreteOperator& op, double t, const CVector& f) {
  if (t < 0.0) throw InvalidArgument("heat time must be nonnegative");
  if (op.grid().node_count() > 4096) throw InvalidArgument("dense oracle limited to 4096 nodes");
  if (t == 0.0) return f;
  const Eigen::MatrixXcd M = Eigen::MatrixXcd(op.matrix()) * Complex(-t);
  return M.exp() * f;
}

ScalarField heat_apply(const Semigroup& sg, double t, const ScalarField& f, HeatMethod method) {
  require_same_grid(sg.grid(), f.grid, "heat_apply");
  if (t < 0.0) throw InvalidArgument("heat time must be nonnegative");
  switch (method) {
    case HeatMethod::dense_oracle:
      return {f.grid, dense_expm_apply(sg.op(), t, f.values)};
    case HeatMethod::spectral:
      if (!sg.has_spectrum()) throw InvalidArgument("engine has no spectral decomposition");
      return {f.grid, sg.heat(t, f.values)};
    case HeatMethod::krylov:
      break;
  }
  if (sg.has_spectrum()) {
    // The engine is spectral, so run a separate sparse engine for the Krylov path.
    SemigroupOptions o = sg.options();
    o.backend = Backend::krylov;
    return heat_apply(Semigroup(sg.op(), o), t, f, HeatMethod::krylov);
  }
  return {f.grid, sg.heat(t, f.values)};
}

ScalarField heat_apply(const DiscreteOperator& op, double t, const ScalarField& f, HeatMethod method) {
  SemigroupOptions o;
  o.backend = method == HeatMethod::spectral ? Backend::spectral : Backend::krylov;
  return heat_apply(Semigroup(op, o), t, f, method);
}

ScalarField heat_power_apply(const Semigroup& sg, double t, int K, const ScalarField& f) {
  require_same_grid(sg.grid(), f.grid, "heat_power_apply");
  if (!(t > 0.0)) throw InvalidArgument("heat power needs t > 0");
  if (K < 1 || K > sg.options().max_power)
    throw InvalidArgument(fmt::format("heat power needs 1 <= K <= {}", sg.options().max_power));
  return {f.grid, sg.heat_power_family({t * t}, K, f.values).front()};
}

ScalarField resolvent_apply(const Semigroup& sg, double t, const ScalarField& f) {
  require_same_grid(sg.grid(), f.grid, "resolvent_apply");
  if (t < 0.0) throw InvalidArgument("resolvent parameter must be nonnegative");
  return {f.grid, sg.resolvent(t * t, f.values)};
}

ScalarField poisson_apply(const Semigroup& sg, double t, const ScalarField& f, int quad_nodes) {
  require_same_grid(sg.grid(), f.grid, "poisson_apply");
  if (quad_nodes < 16) throw InvalidArgument("poisson quadrature needs at least 16 nodes");
  return {f.grid, sg.poisson(t, f.values, quad_nodes)};
}

ScalarField neg_power_apply(const Semigroup& sg, int k, const ScalarField& f) {
  require_same_grid(sg.grid(), f.grid, "neg_power_apply");
  return {f.grid, sg.neg_power(k, f.values)};
}

}  // namespace hardy
