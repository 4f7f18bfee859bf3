#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "heatctl/oracle.hpp"
#include "heatctl/pde.hpp"

using namespace heatctl;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

// RK4 on a' = -lam a - M; returns the first time a <= r (linear interpolation).
double ode_hitting_time(double a0, double r, double lam, double M, double dt) {
  auto rhs = [&](double a) { return -lam * a - M; };
  double a = a0;
  double t = 0.0;
  while (a > r) {
    const double k1 = rhs(a), k2 = rhs(a + 0.5 * dt * k1), k3 = rhs(a + 0.5 * dt * k2), k4 = rhs(a + dt * k3);
    const double next = a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (next <= r) return t + dt * (a - r) / (a - next);
    a = next;
    t += dt;
  }
  return t;
}

double ode_terminal(double a0, double lam, double M, double T, std::size_t steps) {
  const double dt = T / static_cast<double>(steps);
  auto rhs = [&](double a) { return -lam * a - M; };
  double a = a0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double k1 = rhs(a), k2 = rhs(a + 0.5 * dt * k1), k3 = rhs(a + 0.5 * dt * k2), k4 = rhs(a + dt * k3);
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return a;
}

Vector scaled(Vector v, double c) {
  for (double& x : v) x *= c;
  return v;
}

BruteForceOptions coarse(std::size_t k, std::size_t m, double step, int half_levels) {
  BruteForceOptions o;
  o.k_modes = k;
  o.m_intervals = m;
  for (int i = -half_levels; i <= half_levels; ++i) o.amp_grid.push_back(step * i);
  return o;
}

}  // namespace

TEST_CASE("scalar oracle examples") {
  const ScalarInstance inst(2.0, 0.5, kPi2);
  CHECK(scalar_tau(inst, 0.0) == doctest::Approx(std::log(4.0) / kPi2).epsilon(1e-15));
  CHECK(scalar_tau(inst, 0.0) == inst.gamma());
  CHECK(scalar_tau(inst, 10.0) == doctest::Approx(0.0697872).epsilon(1e-6));
  CHECK(scalar_alpha(inst, 0.1) == doctest::Approx(3.861288).epsilon(1e-6));
  CHECK(scalar_alpha(inst, inst.gamma()) == doctest::Approx(0.0).scale(1.0));
  CHECK(scalar_tau(inst, 1e12) < 1e-10);
  CHECK(scalar_tau(inst, INFINITY) == 0.0);

  CHECK_THROWS_AS(scalar_alpha(inst, 0.0), ArgumentError);
  CHECK_THROWS_AS(scalar_alpha(inst, 1.1 * inst.gamma()), ArgumentError);
  CHECK_THROWS_AS(scalar_tau(inst, -1.0), ArgumentError);
  CHECK_THROWS_AS(ScalarInstance(0.4, 0.5, kPi2), ArgumentError);
  CHECK_THROWS_AS(ScalarInstance(2.0, 0.5, 0.0), ArgumentError);
}

TEST_CASE("scalar oracle agrees with a dense ODE simulation") {
  const ScalarInstance inst(2.0, 0.5, kPi2);
  for (double M : {0.0, 1.0, 10.0, 100.0}) {
    const double t = ode_hitting_time(inst.a0, inst.r, inst.lam, M, 1e-6);
    CHECK(scalar_tau(inst, M) == doctest::Approx(t).epsilon(1e-6));
  }
  for (double T : {0.03, 0.07, 0.1}) {
    const double a = scalar_alpha(inst, T);
    CHECK(ode_terminal(inst.a0, inst.lam, a, T, 100000) == doctest::Approx(inst.r).epsilon(1e-9));
  }
}

TEST_CASE("scalar oracle composition identities and monotonicity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = 0.1 + unit(rng);
    const ScalarInstance inst(r * (1.5 + 5.0 * unit(rng)), r, 1.0 + 50.0 * unit(rng));
    const double T = inst.gamma() * (0.01 + 0.98 * unit(rng));
    CHECK(scalar_tau(inst, scalar_alpha(inst, T)) == doctest::Approx(T).epsilon(1e-10));
    const double M = 1000.0 * unit(rng);
    const double tau = scalar_tau(inst, M);
    CHECK(scalar_alpha(inst, tau) == doctest::Approx(M).epsilon(1e-10).scale(1.0));

    CHECK(scalar_tau(inst, M + 1.0) < tau);
    CHECK(scalar_alpha(inst, 0.9 * T) > scalar_alpha(inst, T));
  }
}

TEST_CASE("brute force brackets the closed form on the linear global instance") {
  const SpatialGrid g = SpatialGrid::global(1.0, 127);
  const Vector y0 = scaled(eigenmode(g, 1), 2.0);
  const TargetBall ball(0.5);
  const ScalarInstance inst(2.0, 0.5, first_eigenvalue(g));
  const double alpha = scalar_alpha(inst, 0.1);

  const BruteForceBracket one = galerkin_bruteforce_alpha(y0, 0.1, coarse(1, 1, 1.0, 10), NonlinearitySpec::zero(), g, ball);
  REQUIRE(one.lower);
  REQUIRE(one.upper);
  CHECK(*one.lower == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(*one.upper == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(one.contains(3.8614));
  CHECK(one.contains(alpha));

  const BruteForceBracket two = galerkin_bruteforce_alpha(y0, 0.1, coarse(2, 2, 1.0, 5), NonlinearitySpec::zero(), g, ball);
  CHECK(two.contains(alpha));
  CHECK(two.candidates == 81u * 81u);  // 81 pairs with c1^2 + c2^2 <= 25 per interval
  for (std::size_t i = 1; i < two.best_terminal.size(); ++i) CHECK(two.best_terminal[i] <= two.best_terminal[i - 1]);
}

TEST_CASE("brute force edge cases") {
  const SpatialGrid g(1.0, 63, 0.3, 0.8);
  const Vector y0 = scaled(eigenmode(g, 1), 2.0);
  const TargetBall ball(0.5);
  const auto f = NonlinearitySpec::tanh(1.0);

  SUBCASE("all levels infeasible") {
    const auto br = galerkin_bruteforce_alpha(y0, 0.03, coarse(1, 1, 0.5, 2), f, g, ball);
    CHECK_FALSE(br.upper);
    REQUIRE(br.lower);
    CHECK(*br.lower == br.levels.back());
    CHECK(br.contains(1e6));
  }
  SUBCASE("zero control already feasible") {
    const auto br = galerkin_bruteforce_alpha(y0, 0.2, coarse(1, 1, 1.0, 2), f, g, ball);
    CHECK_FALSE(br.lower);
    REQUIRE(br.upper);
    CHECK(*br.upper == 0.0);
  }
  SUBCASE("result does not depend on the thread count") {
    BruteForceOptions a = coarse(2, 2, 2.0, 4);
    BruteForceOptions b = a;
    a.threads = 1;
    b.threads = 3;
    const auto ra = galerkin_bruteforce_alpha(y0, 0.08, a, f, g, ball);
    const auto rb = galerkin_bruteforce_alpha(y0, 0.08, b, f, g, ball);
    CHECK(ra.lower == rb.lower);
    CHECK(ra.upper == rb.upper);
    CHECK(ra.best_terminal == rb.best_terminal);
  }
  SUBCASE("budget") {
    BruteForceOptions o = coarse(3, 3, 1.0, 10);
    CHECK_THROWS_AS(galerkin_bruteforce_alpha(y0, 0.1, o, f, g, ball), EnumerationTooLarge);
    o = coarse(1, 1, 1.0, 2);
    o.budget = 4;
    CHECK_THROWS_AS(galerkin_bruteforce_alpha(y0, 0.1, o, f, g, ball), EnumerationTooLarge);
  }
  SUBCASE("amplitude grid validation") {
    BruteForceOptions o = coarse(1, 1, 1.0, 2);
    o.amp_grid = {0.0, 1.0};
    CHECK_THROWS_AS(galerkin_bruteforce_alpha(y0, 0.1, o, f, g, ball), ArgumentError);
    o.amp_grid = {-1.0, 1.0};
    CHECK_THROWS_AS(galerkin_bruteforce_alpha(y0, 0.1, o, f, g, ball), ArgumentError);
    o = coarse(1, 1, 1.0, 11);
    CHECK_THROWS_AS(galerkin_bruteforce_alpha(y0, 0.1, o, f, g, ball), ArgumentError);
  }
}
