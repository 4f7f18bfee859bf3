#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "heatctl/core.hpp"

namespace heatctl {

/**
 * One-mode reduction a' = -lam a + u, |u| <= M, a(0) = a0 > r, which is the
 * exact dynamics of y0 = a0 e_1 under f = 0 and omega = Omega.
 */
struct ScalarInstance {
  double a0;
  double r;
  double lam;

  ScalarInstance(double a0, double r, double lam);
  double gamma() const;
};

/// (1/lam) ln((a0 + M/lam) / (r + M/lam)); the time-optimal control is u = -M.
double scalar_tau(const ScalarInstance& inst, double bound);

/// lam (a0 e^{-lam T} - r) / (1 - e^{-lam T}) for 0 < T <= gamma.
double scalar_alpha(const ScalarInstance& inst, double horizon);

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

struct BruteForceOptions {
  std::size_t k_modes = 1;
  std::size_t m_intervals = 1;
  Vector amp_grid;                  // symmetric about 0, contains 0, at most 21 levels
  std::size_t steps = 400;
  std::size_t budget = 10'000'000;  // candidate controls
  std::size_t threads = 0;          // 0 selects hardware concurrency
};

struct BruteForceBracket {
  std::optional<double> lower;  // largest level with no feasible candidate; empty if level 0 is feasible
  std::optional<double> upper;  // smallest level with a feasible candidate; empty means "> max level"
  Vector levels;
  Vector best_terminal;         // best Galerkin terminal norm per level
  std::size_t candidates = 0;

  bool contains(double value) const {
    return (!lower || value >= *lower) && (!upper || value <= *upper);
  }
};

/**
 * Exhaustive search over controls that are piecewise constant on m equal
 * time intervals with spatial profile sum_j c_j chi_omega e_j, j <= k, and
 * coefficients c_j drawn from amp_grid. The state is projected on the first
 * k modes; f is evaluated at the grid nodes and projected back. A candidate
 * needs level max_intervals ||sum_j c_j chi_omega e_j||.
 */
BruteForceBracket galerkin_bruteforce_alpha(std::span<const double> y0, double horizon, const BruteForceOptions& opts,
                                            const NonlinearitySpec& f, const SpatialGrid& g, const TargetBall& ball);

}  // namespace heatctl
