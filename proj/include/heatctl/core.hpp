#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatctl {

using Vector = std::vector<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A state became non-finite; under (H1) this means the time step is too large.
class SolverDivergence : public Error {
 public:
  using Error::Error;
};

/**
 * Uniform 1D discretization of Omega = (0, ell) with homogeneous Dirichlet
 * boundary values. Only the n interior nodes x_i = (i+1)h carry unknowns.
 * The control region omega = (a, b) is stored as a 0/1 mask over the nodes.
 */
class SpatialGrid {
 public:
  SpatialGrid(double ell, std::size_t n, double omega_a, double omega_b);

  /// Grid whose control region is the whole domain.
  static SpatialGrid global(double ell, std::size_t n) { return {ell, n, 0.0, ell}; }

  std::size_t n() const { return n_; }
  double h() const { return h_; }
  double ell() const { return ell_; }
  double omega_a() const { return omega_a_; }
  double omega_b() const { return omega_b_; }
  double node(std::size_t i) const { return static_cast<double>(i + 1) * h_; }
  std::span<const double> mask() const { return mask_; }
  bool omega_is_domain() const;

  /// Multiplies v by the indicator of omega in place.
  void apply_mask(std::span<double> v) const;

 private:
  std::size_t n_;
  double ell_;
  double h_;
  double omega_a_;
  double omega_b_;
  Vector mask_;
};

/// Discrete L2(Omega) inner product h * sum a_i b_i.
double inner(std::span<const double> a, std::span<const double> b, const SpatialGrid& g);

/// Discrete L2(Omega) norm sqrt(h * sum v_i^2).
double l2_norm(std::span<const double> v, const SpatialGrid& g);

enum class NonlinearityKind { zero, scaled_tanh, bounded_odd_rational };

std::string to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(const std::string& name);

/**
 * Built-in nonlinearities satisfying (H1):
 *   zero                  f(y) = 0
 *   scaled_tanh           f(y) = L tanh(y)
 *   bounded_odd_rational  f(y) = L y / (1 + y^2)
 * For both nontrivial kinds sup |f'| = f'(0) = L.
 */
class NonlinearitySpec {
 public:
  NonlinearitySpec() = default;
  NonlinearitySpec(NonlinearityKind kind, double lipschitz);

  static NonlinearitySpec zero() { return {}; }
  static NonlinearitySpec tanh(double lipschitz) { return {NonlinearityKind::scaled_tanh, lipschitz}; }
  static NonlinearitySpec rational(double lipschitz) {
    return {NonlinearityKind::bounded_odd_rational, lipschitz};
  }

  NonlinearityKind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  bool is_linear() const { return kind_ == NonlinearityKind::zero || lipschitz_ == 0.0; }

  double value(double y) const;
  double derivative(double y) const;

 private:
  NonlinearityKind kind_ = NonlinearityKind::zero;
  double lipschitz_ = 0.0;
};

struct H1Report {
  double max_abs_derivative = 0.0;
  double min_sign_product = 0.0;  // min f(y) y over the samples
  double max_abs_f_at_zero = 0.0;
  bool derivative_ok = false;
  bool sign_ok = false;
  bool pass = false;
};

H1Report validate_h1(const NonlinearitySpec& f, std::span<const double> samples);

/// Same check for an arbitrary pair (f, f') claimed to have derivative bound L.
H1Report validate_h1(const std::function<double(double)>& f, const std::function<double(double)>& fprime,
                     double lipschitz, std::span<const double> samples);

/// n equally spaced points on [lo, hi].
Vector linspace(double lo, double hi, std::size_t n);

/// Closed target ball B(0, r).
class TargetBall {
 public:
  explicit TargetBall(double r);
  double r() const { return r_; }
  bool contains(double norm) const { return norm <= r_; }

 private:
  double r_;
};

struct H2Result {
  bool ok = false;
  double norm = 0.0;
  double radius = 0.0;
};

/// (H2): y0 lies strictly outside the closed ball.
H2Result validate_h2(std::span<const double> y0, const TargetBall& ball, const SpatialGrid& g);

/// Raised when (H2) fails; carries the offending norm.
class H2Violation : public Error {
 public:
  H2Violation(double norm, double radius);
  double norm() const { return norm_; }
  double radius() const { return radius_; }

 private:
  double norm_;
  double radius_;
};

/**
 * Piecewise-constant-in-time control on the state time grid: values[k] acts on
 * the step t_k -> t_{k+1}. Entries outside omega are zeroed on construction.
 */
class ControlSignal {
 public:
  ControlSignal() = default;
  ControlSignal(const SpatialGrid& g, double dt, std::size_t nt, Vector values);

  static ControlSignal zero(const SpatialGrid& g, double dt, std::size_t nt);

  double dt() const { return dt_; }
  std::size_t nt() const { return nt_; }
  std::size_t n() const { return n_; }
  double horizon() const { return dt_ * static_cast<double>(nt_); }

  std::span<const double> step(std::size_t k) const { return {values_.data() + k * n_, n_}; }
  std::span<const double> data() const { return values_; }

  double pointwise_norm(std::size_t k, const SpatialGrid& g) const { return l2_norm(step(k), g); }
  Vector pointwise_norms(const SpatialGrid& g) const;
  double max_pointwise_norm(const SpatialGrid& g) const;

  /// Same values on a grid with a different step size.
  ControlSignal with_dt(double dt) const;

 private:
  double dt_ = 0.0;
  std::size_t nt_ = 0;
  std::size_t n_ = 0;
  Vector values_;
};

/// States y(t_k), k = 0..nt, with cached discrete L2 norms.
class StateTrajectory {
 public:
  StateTrajectory() = default;
  StateTrajectory(const SpatialGrid& g, double dt, std::size_t nt, Vector states);

  double dt() const { return dt_; }
  std::size_t nt() const { return nt_; }
  std::size_t n() const { return n_; }
  double time(std::size_t k) const { return dt_ * static_cast<double>(k); }

  std::span<const double> state(std::size_t k) const { return {states_.data() + k * n_, n_}; }
  std::span<const double> initial() const { return state(0); }
  std::span<const double> terminal() const { return state(nt_); }
  const Vector& norms() const { return norms_; }

 private:
  double dt_ = 0.0;
  std::size_t nt_ = 0;
  std::size_t n_ = 0;
  Vector states_;
  Vector norms_;
};

/// Throws DimensionError unless v.size() == g.n().
void require_size(std::span<const double> v, const SpatialGrid& g, const char* what);

}  // namespace heatctl
