#include "heatctl/reach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace heatctl {

void ReachOptions::validate() const {
  if (steps == 0 || max_iters == 0 || max_backtracks == 0) throw ArgumentError("reach options: counts must be positive");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw ArgumentError("reach options: backtrack factor must lie in (0, 1)");
  if (!(step_growth >= 1.0)) throw ArgumentError("reach options: step growth must be >= 1");
  if (!(initial_step >= 0.0)) throw ArgumentError("reach options: initial step must be >= 0");
  if (!(stagnation_tol > 0.0)) throw ArgumentError("reach options: stagnation tolerance must be positive");
  if (!(feas_rel > 0.0 && feas_rel < 0.1)) throw ArgumentError("reach options: feasibility slack must be in (0, 0.1)");
}

std::string to_string(ReachExit e) {
  switch (e) {
    case ReachExit::feasible_target: return "feasible_target";
    case ReachExit::stationary: return "stationary";
    case ReachExit::stalled: return "stalled";
    case ReachExit::certified_infeasible: return "certified_infeasible";
    case ReachExit::max_iters: return "max_iters";
  }
  return "unknown";
}

double control_inner(std::span<const double> a, std::span<const double> b, double dt, const SpatialGrid& g) {
  if (a.size() != b.size()) throw DimensionError("control_inner: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return dt * g.h() * s;
}

ControlSignal project_pointwise(const ControlSignal& u, double bound, const SpatialGrid& g) {
  if (bound < 0.0 || !std::isfinite(bound)) throw ArgumentError("project_pointwise: bound must be finite and >= 0");
  Vector values(u.data().begin(), u.data().end());
  const std::size_t n = u.n();
  for (std::size_t k = 0; k < u.nt(); ++k) {
    std::span<double> step{values.data() + k * n, n};
    const double norm = l2_norm(step, g);
    if (norm > bound) {
      const double scale = bound / norm;
      for (double& x : step) x *= scale;
    }
  }
  return {g, u.dt(), u.nt(), std::move(values)};
}

namespace {

Vector masked_gradient(const StateTrajectory& y, const NonlinearitySpec& f, const SpatialGrid& g) {
  const AdjointTrajectory psi = solve_adjoint(y, y.terminal(), f, g);
  const std::size_t n = g.n();
  Vector grad(y.nt() * n);
  const auto mask = g.mask();
  for (std::size_t k = 0; k < y.nt(); ++k) {
    const auto pk = psi.control_costate(k);
    for (std::size_t i = 0; i < n; ++i) grad[k * n + i] = mask[i] * pk[i];
  }
  return grad;
}

double half_sq(double x) { return 0.5 * x * x; }

}  // namespace

ObjectiveEval evaluate_objective(std::span<const double> y0, const ControlSignal& v, const NonlinearitySpec& f,
                                 const SpatialGrid& g, bool with_gradient) {
  ObjectiveEval ev;
  ev.trajectory = solve_forward(y0, v, f, g);
  ev.value = half_sq(ev.trajectory.norms().back());
  if (!std::isfinite(ev.value)) throw SolverDivergence("objective is not finite");
  if (with_gradient) ev.gradient = masked_gradient(ev.trajectory, f, g);
  return ev;
}

ReachResult min_terminal_norm(std::span<const double> y0, double horizon, double bound, const TargetBall& ball,
                              const NonlinearitySpec& f, const SpatialGrid& g, const ReachOptions& opts,
                              const ControlSignal* warm_start) {
  opts.validate();
  require_size(y0, g, "min_terminal_norm: y0");
  if (!(horizon > 0.0)) throw ArgumentError("min_terminal_norm: horizon must be positive");
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw ArgumentError("min_terminal_norm: bound must be finite and >= 0");

  const std::size_t nt = opts.steps;
  const std::size_t n = g.n();
  const double dt = horizon / static_cast<double>(nt);
  const double eps_feas = opts.feas_rel * ball.r();
  const double j_target = half_sq(ball.r() - eps_feas);
  const double j_hopeless = half_sq(ball.r() + eps_feas);
  const bool convex = f.is_linear();

  ReachResult res;
  auto eval = [&](const ControlSignal& v, bool grad) {
    ++res.solves;
    return evaluate_objective(y0, v, f, g, grad);
  };

  // Starting point: best of zero, adjoint bang-bang, and the warm start.
  ControlSignal v = ControlSignal::zero(g, dt, nt);
  ObjectiveEval cur = eval(v, true);
  if (bound > 0.0) {
    Vector bb(nt * n, 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
      std::span<const double> gk{cur.gradient.data() + k * n, n};
      const double norm = l2_norm(gk, g);
      if (norm > 0.0)
        for (std::size_t i = 0; i < n; ++i) bb[k * n + i] = -bound * gk[i] / norm;
    }
    std::vector<ControlSignal> starts;
    starts.emplace_back(g, dt, nt, std::move(bb));
    if (warm_start != nullptr && warm_start->nt() == nt && warm_start->n() == n)
      starts.push_back(project_pointwise(warm_start->with_dt(dt), bound, g));
    for (const auto& s : starts) {
      ObjectiveEval cand = eval(s, false);
      if (cand.value < cur.value) {
        cand.gradient = masked_gradient(cand.trajectory, f, g);
        cur = std::move(cand);
        v = s;
      }
    }
  }

  double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / first_eigenvalue(g);
  const double scale = bound * std::sqrt(horizon);
  res.objective_history.push_back(cur.value);

  auto finish = [&](ReachExit e, bool converged) {
    res.exit = e;
    res.converged = converged;
  };

  for (;;) {
    if (cur.value <= j_target) {
      finish(ReachExit::feasible_target, true);
      break;
    }
    if (bound == 0.0) {
      finish(ReachExit::stationary, true);
      break;
    }
    if (convex) {
      // min over the admissible set of the linearization: -M sum_k dt ||G_k||.
      double support = 0.0;
      for (std::size_t k = 0; k < nt; ++k) support += dt * l2_norm({cur.gradient.data() + k * n, n}, g);
      const double gap = control_inner(cur.gradient, v.data(), dt, g) + bound * support;
      if (cur.value - gap > j_hopeless) {
        finish(ReachExit::certified_infeasible, true);
        break;
      }
    }
    if (res.iterations >= opts.max_iters) {
      finish(ReachExit::max_iters, false);
      break;
    }

    bool accepted = false;
    bool zero_step = false;
    double step_norm = 0.0;
    ControlSignal trial;
    ObjectiveEval trial_eval;
    for (std::size_t b = 0; b < opts.max_backtracks; ++b) {
      Vector moved(v.data().begin(), v.data().end());
      for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= step * cur.gradient[i];
      trial = project_pointwise(ControlSignal(g, dt, nt, std::move(moved)), bound, g);
      Vector d(trial.data().begin(), trial.data().end());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= v.data()[i];
      const double d2 = control_inner(d, d, dt, g);
      if (d2 == 0.0) {
        zero_step = true;
        break;
      }
      trial_eval = eval(trial, false);
      const double model = cur.value + control_inner(cur.gradient, d, dt, g) + d2 / (2.0 * step);
      if (trial_eval.value <= model && trial_eval.value <= cur.value) {
        accepted = true;
        step_norm = std::sqrt(d2);
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (zero_step) {
      finish(ReachExit::stationary, true);
      break;
    }
    if (!accepted) {
      finish(ReachExit::stalled, true);
      break;
    }

    ++res.iterations;
    const double previous = cur.value;
    trial_eval.gradient = masked_gradient(trial_eval.trajectory, f, g);
    cur = std::move(trial_eval);
    v = std::move(trial);
    res.objective_history.push_back(cur.value);

    if (cur.value > j_target) {
      if (step_norm <= opts.stagnation_tol * scale) {
        finish(ReachExit::stationary, true);
        break;
      }
      if (previous - cur.value <= 1e-14 * previous) {
        finish(ReachExit::stalled, true);
        break;
      }
    }
    step = std::min(step * opts.step_growth, 1e12);
  }

  res.terminal_norm = cur.trajectory.norms().back();
  res.feasible = res.terminal_norm <= ball.r() + eps_feas;
  res.control = std::move(v);
  return res;
}

bool feasible(std::span<const double> y0, double horizon, double bound, const TargetBall& ball,
              const NonlinearitySpec& f, const SpatialGrid& g, const ReachOptions& opts) {
  return min_terminal_norm(y0, horizon, bound, ball, f, g, opts).feasible;
}

GradientCheck gradient_fd_check(std::span<const double> y0, const ControlSignal& v, const ControlSignal& direction,
                                const NonlinearitySpec& f, const SpatialGrid& g, double eps) {
  if (direction.nt() != v.nt() || direction.n() != v.n())
    throw DimensionError("gradient_fd_check: direction does not match control");
  if (!(eps > 0.0)) eps = default_fd_step(f);
  GradientCheck out;
  const ObjectiveEval base = evaluate_objective(y0, v, f, g, true);
  out.adjoint_derivative = control_inner(base.gradient, direction.data(), v.dt(), g);

  auto shifted = [&](double s) {
    Vector w(v.data().begin(), v.data().end());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * direction.data()[i];
    const auto y = solve_forward(y0, ControlSignal(g, v.dt(), v.nt(), std::move(w)), f, g);
    const auto yN = y.terminal();
    return Vector(yN.begin(), yN.end());
  };
  // J(+) - J(-) = <y+ - y-, y+ + y->/2, evaluated without subtracting two large objectives.
  const Vector plus = shifted(eps);
  const Vector minus = shifted(-eps);
  Vector diff(plus.size()), sum(plus.size());
  for (std::size_t i = 0; i < plus.size(); ++i) {
    diff[i] = plus[i] - minus[i];
    sum[i] = plus[i] + minus[i];
  }
  out.fd_derivative = 0.5 * inner(diff, sum, g) / (2.0 * eps);
  const double denom = std::max(std::abs(out.adjoint_derivative), std::abs(out.fd_derivative));
  out.relative_error = denom > 0.0 ? std::abs(out.adjoint_derivative - out.fd_derivative) / denom : 0.0;
  return out;
}

double default_fd_step(const NonlinearitySpec& f) { return f.is_linear() ? 1.0 : 1e-3; }

ControlSignal random_smooth_control(const SpatialGrid& g, double dt, std::size_t nt, double bound,
                                    std::mt19937_64& rng) {
  constexpr std::size_t kModes = 6;
  const std::size_t n = g.n();
  const std::size_t modes = std::min(kModes, n);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector values(nt * n, 0.0);
  for (std::size_t j = 1; j <= modes; ++j) {
    const Vector e = eigenmode(g, j);
    const double c0 = unit(rng), c1 = unit(rng), c2 = unit(rng);
    for (std::size_t k = 0; k < nt; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(nt);
      const double a = (c0 + c1 * std::cos(std::numbers::pi * s) + c2 * std::sin(2.0 * std::numbers::pi * s)) / static_cast<double>(j);
      for (std::size_t i = 0; i < n; ++i) values[k * n + i] += a * e[i];
    }
  }
  ControlSignal u(g, dt, nt, std::move(values));
  const double peak = u.max_pointwise_norm(g);
  Vector scaled(u.data().begin(), u.data().end());
  const double c = peak > 0.0 ? bound / peak : 0.0;
  for (double& x : scaled) x *= c;
  return {g, dt, nt, std::move(scaled)};
}

}  // namespace heatctl
