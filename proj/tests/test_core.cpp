#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "heatctl/core.hpp"
#include "heatctl/pde.hpp"

using namespace heatctl;

TEST_CASE("grid spacing and control mask") {
  const SpatialGrid g(1.0, 127, 0.3, 0.8);
  CHECK(g.h() * 128.0 == doctest::Approx(1.0).epsilon(1e-15));
  std::size_t support = 0;
  for (std::size_t i = 0; i < g.n(); ++i) {
    const double m = g.mask()[i];
    CHECK((m == 0.0 || m == 1.0));
    if (m == 1.0) {
      ++support;
      CHECK(g.node(i) > 0.3);
      CHECK(g.node(i) < 0.8);
    }
  }
  CHECK(support > 0);
  CHECK_FALSE(g.omega_is_domain());
  CHECK(SpatialGrid::global(2.0, 15).omega_is_domain());

  CHECK_THROWS_AS(SpatialGrid(1.0, 3, 0.0, 0.1), ArgumentError);  // no node inside omega
  CHECK_THROWS_AS(SpatialGrid(1.0, 10, 0.5, 0.5), ArgumentError);
  CHECK_THROWS_AS(SpatialGrid(1.0, 10, 0.2, 1.5), ArgumentError);
  CHECK_THROWS_AS(SpatialGrid(0.0, 10, 0.0, 0.0), ArgumentError);
}

TEST_CASE("l2_norm examples") {
  const SpatialGrid g = SpatialGrid::global(1.0, 3);  // h = 0.25
  CHECK(l2_norm(Vector(3, 0.0), g) == 0.0);
  CHECK(l2_norm(Vector(3, 1.0), g) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));

  Vector e1 = {1.0, 0.0, 0.0};
  const double s = l2_norm(e1, g);
  for (double& x : e1) x /= s;
  CHECK(l2_norm(e1, g) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(l2_norm(Vector(4, 1.0), g), DimensionError);
}

TEST_CASE("l2_norm is absolutely homogeneous") {
  const SpatialGrid g = SpatialGrid::global(1.0, 63);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(g.n());
    for (double& x : v) x = gauss(rng);
    const double c = 10.0 * gauss(rng);
    Vector cv = v;
    for (double& x : cv) x *= c;
    CHECK(l2_norm(cv, g) == doctest::Approx(std::abs(c) * l2_norm(v, g)).epsilon(1e-13));
  }
}

TEST_CASE("validate_h1 on built-in and hypothetical nonlinearities") {
  const Vector wide = linspace(-50.0, 50.0, 10000);

  const H1Report zero = validate_h1(NonlinearitySpec::zero(), wide);
  CHECK(zero.pass);
  CHECK(zero.max_abs_derivative == 0.0);

  const H1Report th = validate_h1(NonlinearitySpec::tanh(1.0), linspace(-10.0, 10.0, 20001));
  CHECK(th.pass);
  CHECK(th.max_abs_derivative <= 1.0);
  CHECK(th.max_abs_derivative == doctest::Approx(1.0));
  CHECK(th.min_sign_product >= 0.0);

  for (double L : {0.5, 1.0, 3.0}) {
    CHECK(validate_h1(NonlinearitySpec::tanh(L), wide).pass);
    CHECK(validate_h1(NonlinearitySpec::rational(L), wide).pass);
  }

  const H1Report bad = validate_h1([](double y) { return -y; }, [](double) { return -1.0; }, 1.0, wide);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.sign_ok);
  CHECK(bad.derivative_ok);
  CHECK(bad.min_sign_product < 0.0);

  // Claimed bound smaller than the true slope.
  CHECK_FALSE(validate_h1([](double y) { return 2.0 * std::tanh(y); },
                          [](double y) { return 2.0 / (std::cosh(y) * std::cosh(y)); }, 1.0, wide)
                  .pass);
  CHECK_THROWS_AS(validate_h1(NonlinearitySpec::zero(), Vector{}), ArgumentError);
}

TEST_CASE("built-in nonlinearities: f(0) = 0 and derivative matches finite differences") {
  for (const auto& f : {NonlinearitySpec::tanh(1.5), NonlinearitySpec::rational(2.0)}) {
    CHECK(f.value(0.0) == 0.0);
    for (double y : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
      const double fd = (f.value(y + 1e-6) - f.value(y - 1e-6)) / 2e-6;
      CHECK(f.derivative(y) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  CHECK_THROWS_AS(NonlinearitySpec(NonlinearityKind::scaled_tanh, -1.0), ArgumentError);
  CHECK(nonlinearity_kind_from_string("tanh") == NonlinearityKind::scaled_tanh);
  CHECK_THROWS_AS(nonlinearity_kind_from_string("cubic"), ArgumentError);
}

TEST_CASE("validate_h2 treats the ball as closed") {
  const SpatialGrid g = SpatialGrid::global(1.0, 127);
  const TargetBall ball(0.5);
  auto scaled_mode = [&](double norm) {
    Vector e = eigenmode(g, 1);
    for (double& x : e) x *= norm;
    return e;
  };
  CHECK(validate_h2(scaled_mode(2.0), ball, g).ok);
  const H2Result inside = validate_h2(scaled_mode(0.4), ball, g);
  CHECK_FALSE(inside.ok);
  CHECK(inside.norm == doctest::Approx(0.4));

  // Exactly on the sphere: h = 1/4, sqrt(h * 1) = 0.5.
  const SpatialGrid coarse = SpatialGrid::global(1.0, 3);
  const Vector on = {1.0, 0.0, 0.0};
  REQUIRE(l2_norm(on, coarse) == 0.5);
  CHECK_FALSE(validate_h2(on, ball, coarse).ok);

  CHECK_THROWS_AS(TargetBall(0.0), ArgumentError);
  const H2Violation v(0.4, 0.5);
  CHECK(v.norm() == 0.4);
}

TEST_CASE("control signals are supported on omega") {
  const SpatialGrid g(1.0, 31, 0.25, 0.5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  const std::size_t nt = 12;
  Vector values(nt * g.n());
  for (double& x : values) x = gauss(rng);
  const ControlSignal u(g, 0.01, nt, values);
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t i = 0; i < g.n(); ++i)
      if (g.mask()[i] == 0.0) CHECK(u.step(k)[i] == 0.0);
      else CHECK(u.step(k)[i] == values[k * g.n() + i]);
  const Vector norms = u.pointwise_norms(g);
  for (std::size_t k = 0; k < nt; ++k) CHECK(norms[k] == l2_norm(u.step(k), g));
  CHECK(u.horizon() == doctest::Approx(0.12));
  CHECK_THROWS_AS(ControlSignal(g, 0.01, nt, Vector(3)), DimensionError);
  CHECK_THROWS_AS(ControlSignal(g, 0.0, nt, values), ArgumentError);
}

TEST_CASE("state trajectory caches norms") {
  const SpatialGrid g = SpatialGrid::global(1.0, 7);
  Vector states(3 * g.n());
  for (std::size_t i = 0; i < states.size(); ++i) states[i] = static_cast<double>(i % 5) - 2.0;
  const StateTrajectory y(g, 0.1, 2, states);
  for (std::size_t k = 0; k <= 2; ++k) CHECK(y.norms()[k] == l2_norm(y.state(k), g));
  CHECK(y.initial()[0] == states[0]);
  CHECK_THROWS_AS(StateTrajectory(g, 0.1, 3, states), DimensionError);
}
