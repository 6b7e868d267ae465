#pragma once

#include <functional>
#include <memory>

#include "hardy/operator.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

enum class HeatMethod { dense_oracle, krylov, spectral };

enum class Backend {
  automatic,  // spectral up to spectral_limit nodes, krylov beyond
  spectral,   // cached dense eigendecomposition
  krylov,     // sparse Arnoldi, nothing dense is formed
};

struct SemigroupOptions {
  Backend backend = Backend::automatic;
  Index spectral_limit = 1024;
  int krylov_dim = 30;
  double krylov_tol = 1e-12;
  int krylov_max_steps = 200000;
  int poisson_nodes = 64;
  int inverse_sqrt_nodes = 64;
  int max_power = 8;
};

/// Functional calculus for one operator. Factorizations are built once in the
/// constructor and shared immutably, so copies are cheap and every method is
/// safe to call concurrently.
class Semigroup {
 public:
  Semigroup() = default;
  explicit Semigroup(DiscreteOperator op, SemigroupOptions options = {});

  const DiscreteOperator& op() const { return op_; }
  const Grid& grid() const { return op_.grid(); }
  const SemigroupOptions& options() const { return options_; }
  SpectralBounds bounds() const { return bounds_; }
  bool has_spectrum() const { return spectral_ != nullptr; }

  /// Engine for L^*. Reuses the eigendecomposition when there is one.
  Semigroup adjoint() const;

  CVector apply(const CVector& f) const { return op_.apply(f); }
  /// e^{-sL} f.
  CVector heat(double s, const CVector& f) const;
  /// e^{-s_k L} f for every s_k; times need not be sorted.
  std::vector<CVector> heat_family(const std::vector<double>& times, const CVector& f) const;
  /// (s_k L)^K e^{-s_k L} f for every s_k. Spectral engines apply the symbol
  /// directly, which keeps roundoff in the constants from being amplified by L^K.
  std::vector<CVector> heat_power_family(const std::vector<double>& times, int K, const CVector& f) const;
  /// (t^2 L)^K e^{-t sqrt(L)} f.
  CVector poisson_power(double t, int K, const CVector& f) const;
  /// (I + sL)^{-1} f by sparse LU, one refinement step.
  CVector resolvent(double s, const CVector& f) const;
  /// e^{-t sqrt(L)} f; nodes = 0 takes options().poisson_nodes.
  CVector poisson(double t, const CVector& f, int nodes = 0) const;
  /// L^{1/2} f (kernel component dropped).
  CVector sqrt(const CVector& f) const;
  /// L^{-1/2} f by heat quadrature; f must be free of kernel component.
  CVector inverse_sqrt(const CVector& f) const;
  /// L^{-k} f by k pinned sparse solves.
  CVector neg_power(int k, const CVector& f) const;

  /// phi(L) f = V phi(mu) V^{-1} f. Requires has_spectrum(). The second
  /// argument of phi flags the kernel mode.
  CVector apply_symbol(const std::function<Complex(Complex, bool)>& phi, const CVector& f) const;
  /// Eigenvalues, with the kernel mode set to exactly zero.
  const CVector& eigenvalues() const;

  /// Component of f in the kernel of L (the mean on periodic grids, zero otherwise).
  CVector kernel_part(const CVector& f) const;
  /// Applies a heat quadrature rule (heat_family plus the kernel correction).
  CVector apply_rule(const HeatQuadrature& q, const CVector& f) const { return apply_quadrature(q, f); }
  /// Strips a kernel component that is roundoff-sized; throws KernelComponent otherwise.
  CVector require_range(const CVector& f) const;

 private:
  struct Spectral;
  struct Solvers;

  Semigroup(DiscreteOperator op, SemigroupOptions options, std::shared_ptr<const Spectral> spectral);
  CVector apply_quadrature(const HeatQuadrature& q, const CVector& f) const;
  CVector krylov_heat(double s, const CVector& f) const;

  DiscreteOperator op_;
  SemigroupOptions options_;
  SpectralBounds bounds_{0.0, 0.0};
  std::shared_ptr<const Spectral> spectral_;
  std::shared_ptr<const Solvers> solvers_;
};

/// Reference e^{-tL} f via a full dense matrix exponential (scaling and
/// squaring). Limited to N <= 4096.
CVector dense_expm_apply(const DiscreteOperator& op, double t, const CVector& f);

ScalarField heat_apply(const Semigroup& sg, double t, const ScalarField& f, HeatMethod method = HeatMethod::krylov);
ScalarField heat_apply(const DiscreteOperator& op, double t, const ScalarField& f, HeatMethod method = HeatMethod::krylov);
/// (t^2 L)^K e^{-t^2 L} f.
ScalarField heat_power_apply(const Semigroup& sg, double t, int K, const ScalarField& f);
/// (I + t^2 L)^{-1} f.
ScalarField resolvent_apply(const Semigroup& sg, double t, const ScalarField& f);
ScalarField poisson_apply(const Semigroup& sg, double t, const ScalarField& f, int quad_nodes = 64);
ScalarField neg_power_apply(const Semigroup& sg, int k, const ScalarField& f);

}  // namespace hardy
