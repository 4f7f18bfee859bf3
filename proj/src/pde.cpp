#include "heatctl/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace heatctl {

Vector apply_laplacian(std::span<const double> v, const SpatialGrid& g) {
  require_size(v, g, "apply_laplacian");
  const std::size_t n = g.n();
  const double s = 1.0 / (g.h() * g.h());
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? v[i - 1] : 0.0;
    const double right = i + 1 < n ? v[i + 1] : 0.0;
    out[i] = s * (2.0 * v[i] - left - right);
  }
  return out;
}

double first_eigenvalue(const SpatialGrid& g) {
  const double h = g.h();
  return 2.0 / (h * h) * (1.0 - std::cos(std::numbers::pi * h / g.ell()));
}

Vector eigenmode(const SpatialGrid& g, std::size_t i) {
  if (i == 0 || i > g.n()) throw DimensionError("eigenmode: index out of range");
  const double scale = std::sqrt(2.0 / g.ell());
  const double freq = static_cast<double>(i) * std::numbers::pi / g.ell();
  Vector e(g.n());
  for (std::size_t j = 0; j < g.n(); ++j) e[j] = scale * std::sin(freq * g.node(j));
  return e;
}

DirichletSpectrum dirichlet_eigs(const SpatialGrid& g, std::size_t k) {
  if (k > g.n()) {
    std::ostringstream os;
    os << "dirichlet_eigs: requested " << k << " eigenpairs on a grid with " << g.n() << " nodes";
    throw DimensionError(os.str());
  }
  const double h = g.h();
  DirichletSpectrum spec;
  spec.eigenvalues.reserve(k);
  spec.eigenvectors.reserve(k);
  for (std::size_t i = 1; i <= k; ++i) {
    const double theta = static_cast<double>(i) * std::numbers::pi * h / g.ell();
    spec.eigenvalues.push_back(2.0 / (h * h) * (1.0 - std::cos(theta)));
    spec.eigenvectors.push_back(eigenmode(g, i));
  }
  return spec;
}

BackwardEulerOperator::BackwardEulerOperator(const SpatialGrid& g, double dt)
    : dt_(dt), off_(0.0), inv_pivot_(g.n()), upper_(g.n()) {
  if (!(dt > 0.0)) throw ArgumentError("backward Euler: dt must be positive");
  const std::size_t n = g.n();
  const double s = dt / (g.h() * g.h());
  const double diag = 1.0 + 2.0 * s;
  off_ = -s;
  double pivot = diag;
  inv_pivot_[0] = 1.0 / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    upper_[i - 1] = off_ * inv_pivot_[i - 1];
    pivot = diag - off_ * upper_[i - 1];
    inv_pivot_[i] = 1.0 / pivot;
  }
}

void BackwardEulerOperator::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = rhs.size();
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - off_ * rhs[i - 1]) * inv_pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_[i] * rhs[i + 1];
}

namespace {

void check_finite(std::span<const double> v, std::size_t step) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "forward solve produced a non-finite state at step " << step << "; reduce dt";
      throw SolverDivergence(os.str());
    }
  }
}

StateTrajectory march(std::span<const double> y0, const ControlSignal* u, double dt, std::size_t nt,
                      const NonlinearitySpec& f, const SpatialGrid& g) {
  require_size(y0, g, "solve_forward: y0");
  const std::size_t n = g.n();
  const BackwardEulerOperator op(g, dt);
  const auto mask = g.mask();
  const bool nonlinear = !f.is_linear();
  Vector states((nt + 1) * n);
  std::copy(y0.begin(), y0.end(), states.begin());
  for (std::size_t k = 0; k < nt; ++k) {
    const double* prev = states.data() + k * n;
    std::span<double> next{states.data() + (k + 1) * n, n};
    for (std::size_t i = 0; i < n; ++i) {
      double rhs = prev[i];
      if (nonlinear) rhs -= dt * f.value(prev[i]);
      if (u != nullptr) rhs += dt * mask[i] * u->step(k)[i];
      next[i] = rhs;
    }
    op.solve_in_place(next);
    check_finite(next, k + 1);
  }
  return {g, dt, nt, std::move(states)};
}

}  // namespace

StateTrajectory solve_forward(std::span<const double> y0, const ControlSignal& u, const NonlinearitySpec& f,
                              const SpatialGrid& g) {
  if (u.n() != g.n()) throw DimensionError("solve_forward: control size does not match grid");
  return march(y0, &u, u.dt(), u.nt(), f, g);
}

StateTrajectory solve_free(std::span<const double> y0, double dt, std::size_t nt, const NonlinearitySpec& f,
                           const SpatialGrid& g) {
  return march(y0, nullptr, dt, nt, f, g);
}

AdjointTrajectory::AdjointTrajectory(const SpatialGrid& g, double dt, std::size_t nt, Vector costates,
                                     Vector control_costates)
    : dt_(dt), nt_(nt), n_(g.n()), costates_(std::move(costates)), control_(std::move(control_costates)) {
  if (costates_.size() != (nt + 1) * n_ || control_.size() != nt * n_)
    throw DimensionError("adjoint trajectory: inconsistent sizes");
}

AdjointTrajectory solve_adjoint(const StateTrajectory& y, std::span<const double> xi, const NonlinearitySpec& f,
                                const SpatialGrid& g) {
  require_size(xi, g, "solve_adjoint: xi");
  if (y.n() != g.n()) throw DimensionError("solve_adjoint: trajectory size does not match grid");
  const std::size_t n = g.n();
  const std::size_t nt = y.nt();
  const double dt = y.dt();
  const BackwardEulerOperator op(g, dt);
  const bool nonlinear = !f.is_linear();

  Vector psi((nt + 1) * n);
  Vector p(nt * n);
  std::copy(xi.begin(), xi.end(), psi.begin() + static_cast<std::ptrdiff_t>(nt * n));
  for (std::size_t k = nt; k-- > 0;) {
    std::span<double> pk{p.data() + k * n, n};
    const double* next = psi.data() + (k + 1) * n;
    std::copy(next, next + n, pk.begin());
    op.solve_in_place(pk);
    double* cur = psi.data() + k * n;
    const auto yk = y.state(k);
    for (std::size_t i = 0; i < n; ++i) cur[i] = nonlinear ? pk[i] * (1.0 - dt * f.derivative(yk[i])) : pk[i];
  }
  return {g, dt, nt, std::move(psi), std::move(p)};
}

Vector solve_linearized_terminal(const StateTrajectory& y, std::span<const double> dy0, const ControlSignal& du,
                                 const NonlinearitySpec& f, const SpatialGrid& g) {
  require_size(dy0, g, "solve_linearized_terminal: dy0");
  if (du.nt() != y.nt()) throw DimensionError("solve_linearized_terminal: control/trajectory step mismatch");
  const std::size_t n = g.n();
  const double dt = y.dt();
  const BackwardEulerOperator op(g, dt);
  const auto mask = g.mask();
  Vector z(dy0.begin(), dy0.end());
  for (std::size_t k = 0; k < y.nt(); ++k) {
    const auto yk = y.state(k);
    const auto uk = du.step(k);
    for (std::size_t i = 0; i < n; ++i) z[i] = z[i] * (1.0 - dt * f.derivative(yk[i])) + dt * mask[i] * uk[i];
    op.solve_in_place(z);
  }
  return z;
}

std::optional<double> hitting_time(const StateTrajectory& y, const TargetBall& ball) {
  const auto& norms = y.norms();
  if (norms.empty()) return std::nullopt;
  if (ball.contains(norms[0])) return 0.0;
  for (std::size_t k = 1; k < norms.size(); ++k) {
    if (ball.contains(norms[k])) {
      const double drop = norms[k - 1] - norms[k];
      const double frac = drop > 0.0 ? (norms[k - 1] - ball.r()) / drop : 1.0;
      return y.time(k - 1) + y.dt() * std::clamp(frac, 0.0, 1.0);
    }
  }
  return std::nullopt;
}

DecayReport decay_envelope_check(const StateTrajectory& y, const SpatialGrid& g, double tol) {
  DecayReport rep;
  rep.lambda1 = first_eigenvalue(g);
  const auto& norms = y.norms();
  const double n0 = norms.front();
  rep.max_excess = 0.0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const double env = std::exp(-rep.lambda1 * y.time(k)) * n0;
    rep.max_excess = std::max(rep.max_excess, norms[k] - env);
    if (env > 0.0) {
      rep.max_ratio = std::max(rep.max_ratio, norms[k] / env);
      rep.max_relative_gap = std::max(rep.max_relative_gap, std::abs(norms[k] / env - 1.0));
    }
  }
  rep.pass = rep.max_excess <= tol * n0;
  return rep;
}

AprioriReport apriori_bound_check(const StateTrajectory& y, double control_bound, double horizon) {
  AprioriReport rep;
  const auto& norms = y.norms();
  rep.sup_norm = *std::max_element(norms.begin(), norms.end());
  const double n0 = norms.front();
  const double growth = std::exp(horizon);
  rep.bound = std::sqrt(control_bound * control_bound * horizon / 2.0 + n0 * n0) * growth;
  rep.literal_bound = std::sqrt(control_bound * horizon / 2.0 + n0 * n0) * growth;
  rep.slack = rep.bound - rep.sup_norm;
  rep.pass = rep.sup_norm <= rep.bound;
  rep.literal_pass = rep.sup_norm <= rep.literal_bound;
  return rep;
}

ScalingReport scaling_bound_check(const StateTrajectory& full, const StateTrajectory& scaled, double theta,
                                  double control_bound, double horizon, double lipschitz, const SpatialGrid& g) {
  if (full.nt() != scaled.nt() || full.n() != scaled.n())
    throw DimensionError("scaling_bound_check: trajectories differ in shape");
  ScalingReport rep;
  Vector diff(g.n());
  for (std::size_t k = 0; k <= full.nt(); ++k) {
    const auto a = full.state(k);
    const auto b = scaled.state(k);
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a[i] - b[i];
    rep.max_gap = std::max(rep.max_gap, l2_norm(diff, g));
  }
  rep.bound = (1.0 - theta) * control_bound * std::sqrt(horizon) * std::exp((2.0 * lipschitz + 1.0) * horizon / 2.0);
  rep.pass = rep.max_gap <= rep.bound;
  return rep;
}

}  // namespace heatctl
