#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "heatctl/core.hpp"
#include "heatctl/pde.hpp"
#include "heatctl/reach.hpp"

namespace heatctl {

/// One problem instance: grid, nonlinearity, initial state and target.
struct Problem {
  SpatialGrid grid;
  NonlinearitySpec f;
  Vector y0;
  TargetBall ball;

  /// Throws H2Violation when y0 lies in the closed target ball.
  void validate() const;
};

struct SolverOptions {
  ReachOptions reach;
  double tol_T_rel = 1e-3;       // tol_T = tol_T_rel * gamma(y0)
  double tol_M_rel = 1e-3;       // bracket <= tol_M_rel * (1 + M_upper)
  std::size_t max_doublings = 40;
  std::size_t gamma_steps = 2000;
  std::size_t gamma_max_extensions = 30;
};

/// Free-decay hitting time of B(0, r).
double gamma(const Problem& p, const SolverOptions& opts);

/// Value function sample: alpha(T) or tau(M) with its certified control.
struct ValuePoint {
  double parameter = 0.0;
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::optional<double> oracle_value;
  std::size_t iterations = 0;        // bisection iterations
  std::size_t oracle_calls = 0;
  std::size_t oracle_iterations = 0;
  std::size_t inconclusive = 0;      // oracle calls that ran out of budget
  ControlSignal control;             // feasible endpoint's control
  double control_horizon = 0.0;

  double bracket_width() const { return bracket_hi - bracket_lo; }
};

struct ValueCurve {
  std::vector<ValuePoint> points;
  bool strictly_decreasing = false;
  bool non_increasing = false;
  double gamma = 0.0;
};

class InfeasibilitySuspected : public Error {
 public:
  using Error::Error;
};

/// alpha(T): bisection on M between an infeasible 0 and a doubled feasible bound.
ValuePoint minimal_norm(double horizon, const Problem& p, const SolverOptions& opts,
                        std::optional<double> known_gamma = std::nullopt);

/// tau(M): bisection on T over (0, gamma]; tau(0) = gamma.
ValuePoint minimal_time(double bound, const Problem& p, const SolverOptions& opts,
                        std::optional<double> known_gamma = std::nullopt);

class DegenerateCostate : public Error {
 public:
  using Error::Error;
};

/// u_k = M chi_omega p_k / ||chi_omega p_k|| from the control costates.
ControlSignal extract_bangbang(const AdjointTrajectory& psi, double bound, const SpatialGrid& g);

/// Fraction of steps whose pointwise norm lies within [(1-delta) level, (1+delta) level].
double bangbang_report(const ControlSignal& v, double level, double delta, const SpatialGrid& g);

struct EquivalenceT {
  double horizon = 0.0;
  double alpha = 0.0;
  double tau_of_alpha = 0.0;
  double residual = 0.0;           // |tau(alpha(T)) - T|
  double relative_residual = 0.0;  // residual / T
  double extended_hitting_time = 0.0;  // hitting time of the zero-extended alpha(T) control
  double bangbang_fraction = 0.0;
};

struct EquivalenceM {
  double bound = 0.0;
  double tau = 0.0;
  double alpha_of_tau = 0.0;
  double relative_residual = 0.0;  // |alpha(tau(M)) - M| / max(M, 1)
  double restricted_level = 0.0;   // max pointwise norm of the tau(M) control
  bool restricted_feasible = false;
};

EquivalenceT verify_equivalence_T(double horizon, const Problem& p, const SolverOptions& opts,
                                  std::optional<double> known_gamma = std::nullopt);
EquivalenceM verify_equivalence_M(double bound, const Problem& p, const SolverOptions& opts,
                                  std::optional<double> known_gamma = std::nullopt);

/// Sweeps tau over an increasing M grid; points are evaluated concurrently.
ValueCurve tau_curve(const std::vector<double>& bounds, const Problem& p, const SolverOptions& opts);

/// Sweeps alpha over an increasing T grid inside (0, gamma].
ValueCurve alpha_curve(const std::vector<double>& horizons, const Problem& p, const SolverOptions& opts);

}  // namespace heatctl
