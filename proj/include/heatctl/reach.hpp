#pragma once

#include <cstddef>
#include <optional>
#include <random>

#include "heatctl/core.hpp"
#include "heatctl/pde.hpp"

namespace heatctl {

/// Tuning of the projected-gradient reachability oracle.
struct ReachOptions {
  std::size_t steps = 400;        // time steps per solve; dt = T / steps
  std::size_t max_iters = 400;
  double backtrack_factor = 0.5;
  std::size_t max_backtracks = 60;
  double step_growth = 2.0;       // applied after every accepted step
  double initial_step = 0.0;      // 0 selects 1 / lambda_{1,h}
  double stagnation_tol = 1e-7;   // projected step norm relative to M sqrt(T)
  double feas_rel = 1e-3;         // eps_feas = feas_rel * r

  void validate() const;
};

enum class ReachExit { feasible_target, stationary, stalled, certified_infeasible, max_iters };

std::string to_string(ReachExit e);

struct ReachResult {
  double terminal_norm = 0.0;
  ControlSignal control;
  std::size_t iterations = 0;
  std::size_t solves = 0;
  bool feasible = false;
  bool converged = false;
  ReachExit exit = ReachExit::max_iters;
  Vector objective_history;  // J at every accepted iterate, starting point included

  /// Neither feasible nor converged: the budget ran out before a decision.
  bool inconclusive() const { return !feasible && !converged; }
};

/// Radial projection of every step onto {||v|| <= M}.
ControlSignal project_pointwise(const ControlSignal& u, double bound, const SpatialGrid& g);

/// J(v) = 1/2 ||y(T; v, y0)||^2 and its gradient chi_omega p_k in the sum_k dt <.,.> metric.
struct ObjectiveEval {
  double value = 0.0;
  StateTrajectory trajectory;
  Vector gradient;  // nt * n, same layout as ControlSignal
};

ObjectiveEval evaluate_objective(std::span<const double> y0, const ControlSignal& v, const NonlinearitySpec& f,
                                 const SpatialGrid& g, bool with_gradient);

/**
 * Minimizes the terminal norm over controls bounded pointwise by M with
 * projected gradient descent. Each iteration backtracks until the
 * sufficient-decrease condition of the projected step holds, so the J
 * sequence is non-increasing. The start is the best of the zero control, the
 * bang-bang control of the uncontrolled adjoint, and the optional warm start.
 * For f = 0 the problem is convex and the Frank-Wolfe gap gives a certified
 * lower bound that ends hopeless searches early.
 */
ReachResult min_terminal_norm(std::span<const double> y0, double horizon, double bound, const TargetBall& ball,
                              const NonlinearitySpec& f, const SpatialGrid& g, const ReachOptions& opts,
                              const ControlSignal* warm_start = nullptr);

bool feasible(std::span<const double> y0, double horizon, double bound, const TargetBall& ball,
              const NonlinearitySpec& f, const SpatialGrid& g, const ReachOptions& opts);

struct GradientCheck {
  double adjoint_derivative = 0.0;
  double fd_derivative = 0.0;
  double relative_error = 0.0;
};

/// Adjoint directional derivative of J against a central difference with step eps.
/// eps <= 0 selects default_fd_step(f).
GradientCheck gradient_fd_check(std::span<const double> y0, const ControlSignal& v, const ControlSignal& direction,
                                const NonlinearitySpec& f, const SpatialGrid& g, double eps = 0.0);

/// 1 for linear f (J is quadratic, central differences are exact), 1e-3 otherwise.
double default_fd_step(const NonlinearitySpec& f);

/// Control built from the first six eigenmodes with smooth random time profiles,
/// scaled so that max_k ||u(t_k)|| = bound.
ControlSignal random_smooth_control(const SpatialGrid& g, double dt, std::size_t nt, double bound,
                                    std::mt19937_64& rng);

/// sum_k dt <a_k, b_k>_h over two controls on the same time grid.
double control_inner(std::span<const double> a, std::span<const double> b, double dt, const SpatialGrid& g);

}  // namespace heatctl
