#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "heatctl/reach.hpp"
#include "heatctl/solvers.hpp"

using namespace heatctl;

namespace {

Vector scaled(Vector v, double c) {
  for (double& x : v) x *= c;
  return v;
}

ControlSignal random_control(const SpatialGrid& g, double dt, std::size_t nt, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector v(nt * g.n());
  for (double& x : v) x = unit(rng);
  ControlSignal u(g, dt, nt, std::move(v));
  Vector out(u.data().begin(), u.data().end());
  for (std::size_t k = 0; k < nt; ++k) {
    const double s = bound * 0.5 * (1.0 + unit(rng)) / u.pointwise_norm(k, g);
    for (std::size_t i = 0; i < g.n(); ++i) out[k * g.n() + i] *= s;
  }
  return {g, dt, nt, std::move(out)};
}

struct Instance {
  SpatialGrid g;
  NonlinearitySpec f;
  Vector y0;
  TargetBall ball;
};

Instance linear_global() {
  SpatialGrid g = SpatialGrid::global(1.0, 127);
  return {g, NonlinearitySpec::zero(), scaled(eigenmode(g, 1), 2.0), TargetBall(0.5)};
}

Instance tanh_local() {
  SpatialGrid g(1.0, 127, 0.3, 0.8);
  return {g, NonlinearitySpec::tanh(1.0), scaled(eigenmode(g, 1), 2.0), TargetBall(0.5)};
}

}  // namespace

TEST_CASE("project_pointwise") {
  const SpatialGrid g(1.0, 31, 0.1, 0.7);
  std::mt19937_64 rng(2);
  const auto u = random_control(g, 0.01, 20, 1.0, rng);

  SUBCASE("interior points are untouched") {
    const auto p = project_pointwise(u, 1.0, g);
    for (std::size_t i = 0; i < u.data().size(); ++i) CHECK(p.data()[i] == u.data()[i]);
  }
  SUBCASE("a step with norm 2M is halved") {
    Vector v(u.data().begin(), u.data().end());
    const double norm0 = u.pointwise_norm(0, g);
    for (std::size_t i = 0; i < g.n(); ++i) v[i] *= 2.0 / norm0;  // step 0 now has norm 2
    const auto p = project_pointwise(ControlSignal(g, 0.01, 20, v), 1.0, g);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(p.step(0)[i] == doctest::Approx(0.5 * v[i]).epsilon(1e-14));
    CHECK(p.pointwise_norm(0, g) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("M = 0 gives the zero control") {
    const auto p = project_pointwise(u, 0.0, g);
    for (double x : p.data()) CHECK(x == 0.0);
  }
  CHECK_THROWS_AS(project_pointwise(u, -1.0, g), ArgumentError);
}

TEST_CASE("projection is idempotent and non-expansive") {
  const SpatialGrid g(1.0, 31, 0.2, 0.9);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> level(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = random_control(g, 0.01, 15, 4.0, rng);
    const double M = level(rng);
    const auto once = project_pointwise(u, M, g);
    const auto twice = project_pointwise(once, M, g);
    for (std::size_t i = 0; i < once.data().size(); ++i) CHECK(twice.data()[i] == doctest::Approx(once.data()[i]).epsilon(1e-14));
    for (std::size_t k = 0; k < u.nt(); ++k) {
      CHECK(once.pointwise_norm(k, g) <= u.pointwise_norm(k, g) * (1.0 + 1e-15));
      CHECK(once.pointwise_norm(k, g) <= M * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("adjoint gradient agrees with central differences") {
  std::mt19937_64 rng(77);
  const std::size_t nt = 200;
  const double dt = 0.1 / nt;
  SUBCASE("linear f") {
    const Instance in = linear_global();
    const SpatialGrid local(1.0, 127, 0.3, 0.8);
    for (const SpatialGrid* g : {&in.g, &local}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_control(*g, dt, nt, 5.0, rng);
        const auto d = random_smooth_control(*g, dt, nt, 1.0, rng);
        CHECK(gradient_fd_check(in.y0, v, d, in.f, *g).relative_error <= 1e-9);
      }
    }
  }
  SUBCASE("tanh and rational") {
    Instance in = tanh_local();
    for (const auto& f : {NonlinearitySpec::tanh(1.0), NonlinearitySpec::rational(2.0)}) {
      for (int trial = 0; trial < 10; ++trial) {
        const auto v = random_control(in.g, dt, nt, 5.0, rng);
        const auto d = random_smooth_control(in.g, dt, nt, 1.0, rng);
        CHECK(gradient_fd_check(in.y0, v, d, f, in.g).relative_error <= 1e-6);
      }
    }
  }
  SUBCASE("zero direction") {
    const Instance in = tanh_local();
    const auto v = random_control(in.g, dt, nt, 5.0, rng);
    const GradientCheck chk = gradient_fd_check(in.y0, v, ControlSignal::zero(in.g, dt, nt), in.f, in.g);
    CHECK(chk.adjoint_derivative == 0.0);
    CHECK(chk.fd_derivative == 0.0);
    CHECK(chk.relative_error == 0.0);
  }
}

TEST_CASE("random smooth controls") {
  const SpatialGrid g(1.0, 63, 0.2, 0.6);
  std::mt19937_64 rng(5);
  const auto u = random_smooth_control(g, 0.01, 30, 2.5, rng);
  CHECK(u.max_pointwise_norm(g) == doctest::Approx(2.5).epsilon(1e-13));
  for (std::size_t i = 0; i < g.n(); ++i)
    if (g.mask()[i] == 0.0) CHECK(u.step(7)[i] == 0.0);
  std::mt19937_64 again(5);
  const auto w = random_smooth_control(g, 0.01, 30, 2.5, again);
  CHECK(std::equal(u.data().begin(), u.data().end(), w.data().begin()));
}

TEST_CASE("zero bound leaves only the free trajectory") {
  const Instance in = linear_global();
  const ReachOptions opts;
  const Problem p{in.g, in.f, in.y0, in.ball};
  const double g0 = gamma(p, SolverOptions{});
  for (double T : {0.5 * g0, g0, 1.2 * g0}) {
    const ReachResult r = min_terminal_norm(in.y0, T, 0.0, in.ball, in.f, in.g, opts);
    for (double x : r.control.data()) CHECK(x == 0.0);
    const auto y = solve_free(in.y0, T / opts.steps, opts.steps, in.f, in.g);
    CHECK(r.terminal_norm == doctest::Approx(y.norms().back()).epsilon(1e-14));
    CHECK(r.feasible == (T >= g0));
  }
  CHECK(feasible(in.y0, g0, 0.0, in.ball, in.f, in.g, opts));
  CHECK_FALSE(feasible(in.y0, 0.5 * g0, 0.0, in.ball, in.f, in.g, opts));
}

TEST_CASE("linear global instance brackets the closed-form minimal norm at T = 0.1") {
  // alpha(0.1) = lam (2 e^{-0.1 lam} - 0.5) / (1 - e^{-0.1 lam}) ~ 3.86 for lam = pi^2.
  const Instance in = linear_global();
  const ReachOptions opts;
  const ReachResult above = min_terminal_norm(in.y0, 0.1, 4.0, in.ball, in.f, in.g, opts);
  const ReachResult below = min_terminal_norm(in.y0, 0.1, 3.5, in.ball, in.f, in.g, opts);
  CHECK(above.feasible);
  CHECK(above.converged);
  CHECK_FALSE(below.feasible);
  CHECK(below.converged);
  CHECK_FALSE(below.inconclusive());
  for (const auto* r : {&above, &below}) {
    CHECK(r->control.max_pointwise_norm(in.g) <= (r == &above ? 4.0 : 3.5) * (1.0 + 1e-12));
    if (r->feasible) CHECK(r->terminal_norm <= in.ball.r() * (1.0 + opts.feas_rel));
  }
}

TEST_CASE("objective history is non-increasing and controls stay admissible") {
  const Instance in = tanh_local();
  ReachOptions opts;
  opts.steps = 200;
  for (double M : {2.0, 3.5, 6.0}) {
    const ReachResult r = min_terminal_norm(in.y0, 0.1, M, in.ball, in.f, in.g, opts);
    REQUIRE(!r.objective_history.empty());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i)
      CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
    CHECK(r.control.max_pointwise_norm(in.g) <= M * (1.0 + 1e-12));
    CHECK(r.terminal_norm == doctest::Approx(std::sqrt(2.0 * r.objective_history.back())).epsilon(1e-12));
    if (r.feasible) CHECK(r.terminal_norm <= in.ball.r() * (1.0 + opts.feas_rel));
  }
}

TEST_CASE("feasibility is monotone in M and in T") {
  ReachOptions opts;
  opts.steps = 200;
  for (const Instance& in : {linear_global(), tanh_local()}) {
    for (double T : {0.04, 0.08, 0.12}) {
      bool seen = false;
      for (double M : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        const bool ok = feasible(in.y0, T, M, in.ball, in.f, in.g, opts);
        if (seen) CHECK(ok);
        seen = seen || ok;
      }
    }
    for (double M : {1.0, 5.0}) {
      bool seen = false;
      for (double T : {0.02, 0.04, 0.06, 0.08, 0.1, 0.12, 0.14}) {
        const bool ok = feasible(in.y0, T, M, in.ball, in.f, in.g, opts);
        if (seen) CHECK(ok);
        seen = seen || ok;
      }
    }
  }
}

TEST_CASE("warm start is accepted when it is better") {
  const Instance in = tanh_local();
  ReachOptions opts;
  opts.steps = 200;
  const ReachResult first = min_terminal_norm(in.y0, 0.1, 3.0, in.ball, in.f, in.g, opts);
  const ReachResult again = min_terminal_norm(in.y0, 0.1, 3.0, in.ball, in.f, in.g, opts, &first.control);
  CHECK(again.terminal_norm <= first.terminal_norm * (1.0 + 1e-12));
  CHECK(again.iterations <= first.iterations);
}

TEST_CASE("invalid oracle arguments") {
  const Instance in = linear_global();
  ReachOptions opts;
  CHECK_THROWS_AS(min_terminal_norm(in.y0, 0.0, 1.0, in.ball, in.f, in.g, opts), ArgumentError);
  CHECK_THROWS_AS(min_terminal_norm(in.y0, 0.1, -1.0, in.ball, in.f, in.g, opts), ArgumentError);
  CHECK_THROWS_AS(min_terminal_norm(Vector(5, 1.0), 0.1, 1.0, in.ball, in.f, in.g, opts), DimensionError);
  opts.backtrack_factor = 1.5;
  CHECK_THROWS_AS(min_terminal_norm(in.y0, 0.1, 1.0, in.ball, in.f, in.g, opts), ArgumentError);
}
