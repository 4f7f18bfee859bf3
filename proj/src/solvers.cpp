#include "heatctl/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace heatctl {

void Problem::validate() const {
  require_size(y0, grid, "problem: y0");
  const H2Result h2 = validate_h2(y0, ball, grid);
  if (!h2.ok) throw H2Violation(h2.norm, h2.radius);
}

double gamma(const Problem& p, const SolverOptions& opts) {
  p.validate();
  const double lam = first_eigenvalue(p.grid);
  const double n0 = l2_norm(p.y0, p.grid);
  double horizon = 1.1 * std::log(n0 / p.ball.r()) / lam;

  std::optional<double> hit;
  for (std::size_t ext = 0; ext <= opts.gamma_max_extensions && !hit; ++ext) {
    const auto y = solve_free(p.y0, horizon / static_cast<double>(opts.gamma_steps), opts.gamma_steps, p.f, p.grid);
    hit = hitting_time(y, p.ball);
    if (!hit) horizon *= 2.0;
  }
  if (!hit) {
    std::ostringstream os;
    os << "gamma: no crossing of B(0, r) before t = " << horizon;
    throw Error(os.str());
  }

  // Re-resolve on the oracle's time grid at T = gamma so that zero-control
  // feasibility at gamma agrees with the hitting time.
  const std::size_t steps = opts.reach.steps;
  const std::size_t run = steps + steps / 10 + 2;
  for (int pass = 0; pass < 2; ++pass) {
    const double dt = *hit / static_cast<double>(steps);
    const auto y = solve_free(p.y0, dt, run, p.f, p.grid);
    const auto refined = hitting_time(y, p.ball);
    if (!refined) break;
    hit = refined;
  }
  return *hit;
}

namespace {

ReachResult probe(const Problem& p, double horizon, double bound, const SolverOptions& opts, ValuePoint& vp,
                  const ControlSignal* warm) {
  ReachResult r = min_terminal_norm(p.y0, horizon, bound, p.ball, p.f, p.grid, opts.reach, warm);
  ++vp.oracle_calls;
  vp.oracle_iterations += r.iterations;
  if (r.inconclusive()) ++vp.inconclusive;
  return r;
}

}  // namespace

ValuePoint minimal_norm(double horizon, const Problem& p, const SolverOptions& opts, std::optional<double> known_gamma) {
  if (!(horizon > 0.0)) throw ArgumentError("minimal_norm: T must be positive");
  p.validate();
  const double g0 = known_gamma ? *known_gamma : gamma(p, opts);
  const std::size_t nt = opts.reach.steps;

  ValuePoint vp;
  vp.parameter = horizon;
  vp.control_horizon = horizon;
  if (horizon >= g0) {
    vp.control = ControlSignal::zero(p.grid, horizon / static_cast<double>(nt), nt);
    return vp;
  }

  double lo = 0.0;
  double hi = 1.0;
  ReachResult best = probe(p, horizon, hi, opts, vp, nullptr);
  std::size_t doublings = 0;
  while (!best.feasible) {
    if (++doublings > opts.max_doublings) {
      std::ostringstream os;
      os << "minimal_norm: no feasible bound up to M = " << hi << " at T = " << horizon;
      throw InfeasibilitySuspected(os.str());
    }
    lo = hi;
    hi *= 2.0;
    ControlSignal warm = best.control;
    best = probe(p, horizon, hi, opts, vp, &warm);
  }
  while (hi - lo > opts.tol_M_rel * (1.0 + hi)) {
    const double mid = 0.5 * (lo + hi);
    ReachResult r = probe(p, horizon, mid, opts, vp, &best.control);
    ++vp.iterations;
    if (r.feasible) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  vp.bracket_lo = lo;
  vp.bracket_hi = hi;
  vp.value = 0.5 * (lo + hi);
  vp.control = std::move(best.control);
  return vp;
}

ValuePoint minimal_time(double bound, const Problem& p, const SolverOptions& opts, std::optional<double> known_gamma) {
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw ArgumentError("minimal_time: M must be finite and >= 0");
  p.validate();
  const double g0 = known_gamma ? *known_gamma : gamma(p, opts);
  const std::size_t nt = opts.reach.steps;

  ValuePoint vp;
  vp.parameter = bound;
  if (bound == 0.0) {
    vp.value = vp.bracket_lo = vp.bracket_hi = g0;
    vp.control_horizon = g0;
    vp.control = ControlSignal::zero(p.grid, g0 / static_cast<double>(nt), nt);
    return vp;
  }

  double lo = 0.0;
  double hi = g0;
  ReachResult best = probe(p, hi, bound, opts, vp, nullptr);
  for (int grow = 0; !best.feasible && grow < 20; ++grow) {
    hi *= 1.01;
    best = probe(p, hi, bound, opts, vp, nullptr);
  }
  if (!best.feasible) throw InfeasibilitySuspected("minimal_time: zero control does not reach the ball near gamma");

  const double tol = opts.tol_T_rel * g0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    ReachResult r = probe(p, mid, bound, opts, vp, &best.control);
    ++vp.iterations;
    if (r.feasible) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  vp.bracket_lo = lo;
  vp.bracket_hi = hi;
  vp.value = 0.5 * (lo + hi);
  vp.control_horizon = hi;
  vp.control = std::move(best.control);
  return vp;
}

ControlSignal extract_bangbang(const AdjointTrajectory& psi, double bound, const SpatialGrid& g) {
  if (!(bound >= 0.0)) throw ArgumentError("extract_bangbang: M must be >= 0");
  const std::size_t n = g.n();
  const std::size_t nt = psi.nt();
  Vector values(nt * n, 0.0);
  if (bound == 0.0) return {g, psi.dt(), nt, std::move(values)};
  const auto mask = g.mask();
  Vector w(n);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto pk = psi.control_costate(k);
    for (std::size_t i = 0; i < n; ++i) w[i] = mask[i] * pk[i];
    const double norm = l2_norm(w, g);
    if (norm < 1e-14) {
      std::ostringstream os;
      os << "extract_bangbang: masked costate vanishes at step " << k;
      throw DegenerateCostate(os.str());
    }
    for (std::size_t i = 0; i < n; ++i) values[k * n + i] = bound * w[i] / norm;
  }
  return {g, psi.dt(), nt, std::move(values)};
}

double bangbang_report(const ControlSignal& v, double level, double delta, const SpatialGrid& g) {
  if (!(level > 0.0)) throw ArgumentError("bangbang_report: level must be positive");
  if (v.nt() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < v.nt(); ++k) {
    const double norm = v.pointwise_norm(k, g);
    if (norm >= (1.0 - delta) * level && norm <= (1.0 + delta) * level) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(v.nt());
}

EquivalenceT verify_equivalence_T(double horizon, const Problem& p, const SolverOptions& opts,
                                  std::optional<double> known_gamma) {
  const double g0 = known_gamma ? *known_gamma : gamma(p, opts);
  if (!(horizon > 0.0 && horizon <= g0 * (1.0 + 1e-12)))
    throw ArgumentError("verify_equivalence_T: T must lie in (0, gamma]");
  EquivalenceT out;
  out.horizon = horizon;
  const ValuePoint a = minimal_norm(horizon, p, opts, g0);
  out.alpha = a.value;
  const ValuePoint t = minimal_time(a.value, p, opts, g0);
  out.tau_of_alpha = t.value;
  out.residual = std::abs(t.value - horizon);
  out.relative_residual = out.residual / horizon;
  out.bangbang_fraction = a.value > 0.0 ? bangbang_report(a.control, a.value, 0.05, p.grid) : 1.0;

  // Zero extension over (T, 1.5 T].
  const std::size_t nt = a.control.nt();
  const std::size_t extra = nt / 2;
  Vector ext((nt + extra) * p.grid.n(), 0.0);
  std::copy(a.control.data().begin(), a.control.data().end(), ext.begin());
  const ControlSignal extended(p.grid, a.control.dt(), nt + extra, std::move(ext));
  const auto y = solve_forward(p.y0, extended, p.f, p.grid);
  const auto hit = hitting_time(y, p.ball);
  out.extended_hitting_time = hit ? *hit : extended.horizon();
  return out;
}

EquivalenceM verify_equivalence_M(double bound, const Problem& p, const SolverOptions& opts,
                                  std::optional<double> known_gamma) {
  const double g0 = known_gamma ? *known_gamma : gamma(p, opts);
  EquivalenceM out;
  out.bound = bound;
  const ValuePoint t = minimal_time(bound, p, opts, g0);
  out.tau = t.value;
  const ValuePoint a = minimal_norm(t.value, p, opts, g0);
  out.alpha_of_tau = a.value;
  out.relative_residual = std::abs(a.value - bound) / std::max(bound, 1.0);

  out.restricted_level = t.control.max_pointwise_norm(p.grid);
  const auto y = solve_forward(p.y0, t.control, p.f, p.grid);
  out.restricted_feasible = y.norms().back() <= p.ball.r() * (1.0 + opts.reach.feas_rel) &&
                            out.restricted_level <= bound * (1.0 + 1e-6);
  return out;
}

namespace {

void flag_monotonicity(ValueCurve& c) {
  c.strictly_decreasing = true;
  c.non_increasing = true;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    if (!(c.points[i].value < c.points[i - 1].value)) c.strictly_decreasing = false;
    if (c.points[i].value > c.points[i - 1].value) c.non_increasing = false;
  }
}

void require_increasing(const std::vector<double>& grid, const char* what) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ArgumentError(std::string(what) + ": grid must be strictly increasing");
}

template <typename Fn>
std::vector<ValuePoint> evaluate_concurrently(const std::vector<double>& grid, Fn fn) {
  std::vector<std::future<ValuePoint>> jobs;
  jobs.reserve(grid.size());
  for (double x : grid) jobs.push_back(std::async(std::launch::async, fn, x));
  std::vector<ValuePoint> out;
  out.reserve(grid.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

}  // namespace

ValueCurve tau_curve(const std::vector<double>& bounds, const Problem& p, const SolverOptions& opts) {
  require_increasing(bounds, "tau_curve");
  if (!bounds.empty() && bounds.front() < 0.0) throw ArgumentError("tau_curve: M must be >= 0");
  ValueCurve c;
  c.gamma = gamma(p, opts);
  c.points = evaluate_concurrently(bounds, [&](double m) { return minimal_time(m, p, opts, c.gamma); });
  flag_monotonicity(c);
  return c;
}

ValueCurve alpha_curve(const std::vector<double>& horizons, const Problem& p, const SolverOptions& opts) {
  require_increasing(horizons, "alpha_curve");
  ValueCurve c;
  c.gamma = gamma(p, opts);
  for (double t : horizons)
    if (!(t > 0.0 && t <= c.gamma * (1.0 + 1e-12))) {
      std::ostringstream os;
      os.precision(17);
      os << "alpha_curve: T = " << t << " outside (0, gamma] with gamma = " << c.gamma;
      throw ArgumentError(os.str());
    }
  c.points = evaluate_concurrently(horizons, [&](double t) { return minimal_norm(t, p, opts, c.gamma); });
  flag_monotonicity(c);
  return c;
}

}  // namespace heatctl
