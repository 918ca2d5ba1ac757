#include <array>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "predfb/plants.hpp"

using predfb::Mat;
using predfb::StrictFeedbackPlant;
using predfb::Vec;

TEST_SUITE_BEGIN("plants");

TEST_CASE("saturation clamps at unit magnitude") {
  CHECK(predfb::saturation(0.3) == 0.3);
  CHECK(predfb::saturation(-0.3) == -0.3);
  CHECK(predfb::saturation(1.0) == 1.0);
  CHECK(predfb::saturation(7.5) == 1.0);
  CHECK(predfb::saturation(-123.0) == -1.0);
  CHECK_THROWS_AS(predfb::saturation(NAN), std::invalid_argument);
}

TEST_CASE("benchmark nonlinearity: odd, zero at zero, Lipschitz constant attained") {
  const auto plant = predfb::benchmark_plant();
  REQUIRE(plant.n == 2);
  const double L = 4.0 * std::sqrt(2.0) / (3.0 * std::sqrt(3.0));
  CHECK(plant.lipschitz == doctest::Approx(L).epsilon(1e-15));

  auto f1 = [&](double v) {
    const Vec x{v, 0.0};
    return plant.f_eval(0, x);
  };
  CHECK(f1(0.0) == 0.0);
  CHECK(f1(-2.0) == doctest::Approx(-f1(2.0)).epsilon(1e-15));
  CHECK(f1(1.0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // The declared constant is a true global slope bound and it is attained:
  // the maximal difference quotient over a fine grid approaches L.
  double max_slope = 0.0;
  for (int i = -4000; i < 4000; ++i) {
    const double a = i * 0.005, b = (i + 1) * 0.005;
    max_slope = std::max(max_slope, std::fabs(f1(b) - f1(a)) / (b - a));
  }
  CHECK(max_slope <= L + 1e-9);
  CHECK(max_slope >= L - 1e-4);

  // Second component is identically zero; default gains are one.
  const Vec x{0.7, -1.3};
  CHECK(plant.f_eval(1, x) == 0.0);
  CHECK(plant.g_eval(0, x, 2.0) == 1.0);
  CHECK(plant.g_eval(1, x, 2.0) == 1.0);
}

TEST_CASE("strict-feedback rhs assembles f + shift + g d") {
  const auto plant = predfb::benchmark_plant();
  const Vec x{1.0, -2.0};
  const Vec d{0.5, -0.25};
  Vec out(2);
  plant.rhs(x, 3.0, d, out);
  CHECK(out[0] == doctest::Approx(1.0 / std::sqrt(2.0) - 2.0 + 0.5).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(3.0 - 0.25).epsilon(1e-15));

  Vec out_nd(2);
  plant.rhs(x, 3.0, {}, out_nd);  // empty disturbance = zero disturbance
  CHECK(out_nd[0] == doctest::Approx(1.0 / std::sqrt(2.0) - 2.0).epsilon(1e-15));
  CHECK(out_nd[1] == 3.0);

  Vec bad(3);
  CHECK_THROWS_AS(plant.rhs(x, 0.0, d, bad), std::invalid_argument);
  const Vec d_bad{1.0};
  CHECK_THROWS_AS(plant.rhs(x, 0.0, d_bad, out), std::invalid_argument);
}

TEST_CASE("linear chain plant is the pure integrator chain") {
  const auto plant = predfb::linear_chain_plant(3, 0.1, 0.2);
  CHECK(plant.n == 3);
  CHECK(plant.lipschitz == 0.0);
  CHECK(plant.r == 0.1);
  CHECK(plant.tau == 0.2);
  const Vec x{1.0, 2.0, 3.0};
  Vec out(3);
  plant.rhs(x, -4.0, {}, out);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 3.0);
  CHECK(out[2] == -4.0);
  CHECK_THROWS_AS(predfb::linear_chain_plant(0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("validate_plant accepts the benchmark and rejects corrupt constants") {
  auto plant = predfb::benchmark_plant();
  CHECK_NOTHROW(predfb::validate_plant(plant, 500, 7));
  CHECK_NOTHROW(predfb::validate_plant(plant, 0, 0));  // structure-only

  SUBCASE("understated Lipschitz constant") {
    plant.lipschitz *= 0.5;
    CHECK_THROWS_AS(predfb::validate_plant(plant, 500, 7), std::invalid_argument);
  }
  SUBCASE("nonlinearity with f(0) != 0") {
    plant.f[0] = [](std::span<const double>) { return 1.0; };
    CHECK_THROWS_AS(predfb::validate_plant(plant, 0, 0), std::invalid_argument);
  }
  SUBCASE("understated disturbance gain bound") {
    plant.g.resize(2);
    plant.g[0] = [](std::span<const double>, double) { return 2.0; };
    plant.disturbance_bound = 1.0;
    CHECK_THROWS_AS(predfb::validate_plant(plant, 100, 7), std::invalid_argument);
  }
  SUBCASE("negative delay") {
    plant.r = -0.1;
    CHECK_THROWS_AS(predfb::validate_plant(plant, 0, 0), std::invalid_argument);
  }
  SUBCASE("f table size mismatch") {
    plant.f.resize(1);
    CHECK_THROWS_AS(predfb::validate_plant(plant, 0, 0), std::invalid_argument);
  }
}

TEST_CASE("growth envelope: correct at t = 0 and nondecreasing in every argument") {
  const auto plant = predfb::benchmark_plant();
  const double c = (plant.n + 1) * plant.lipschitz + 3.0;
  const double at0 = predfb::growth_envelope(plant, 2.0, 1.0, 3.0, 0.0);
  CHECK(at0 == doctest::Approx(2.0 + 4.0 / std::sqrt(c)).epsilon(1e-15));
  double prev = at0;
  for (double t = 0.5; t <= 5.0; t += 0.5) {
    const double cur = predfb::growth_envelope(plant, 2.0, 1.0, 3.0, t);
    CHECK(cur > prev);
    prev = cur;
  }
  CHECK(predfb::growth_envelope(plant, 2.0, 1.0, 3.0, 1.0) >
        predfb::growth_envelope(plant, 1.9, 1.0, 3.0, 1.0));
  CHECK_THROWS_AS(predfb::growth_envelope(plant, -1.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("feedforward rhs matches the stated chain") {
  const std::array<double, 3> x{0.5, -1.0, 2.0};
  std::array<double, 3> out{};
  predfb::feedforward_rhs(x, 3.0, out);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == doctest::Approx(0.5 + 0.5 * 3.0).epsilon(1e-15));
  CHECK(out[2] == doctest::Approx(-1.0 + 0.25).epsilon(1e-15));
  std::array<double, 2> short_out{};
  CHECK_THROWS_AS(predfb::feedforward_rhs(x, 0.0, short_out), std::invalid_argument);
}

TEST_CASE("feedforward plant validation") {
  predfb::FeedforwardPlant p;
  p.T = 0.5;
  p.r = 0.1;
  p.tau = 0.1;
  p.output_case = predfb::OutputCase::TwoOutput;
  CHECK_NOTHROW(p.validate());

  SUBCASE("delay window must be inside one period") {
    p.r = 0.3;
    p.tau = 0.2;  // r + tau == T
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.tau = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.r = 0.0;
    p.tau = 0.0;  // zero total delay is outside this regime
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("one-output case needs a small input bound") {
    p.output_case = predfb::OutputCase::OneOutput;
    p.eps = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.eps = 1.0 / 6.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.eps = 0.1;
    CHECK_NOTHROW(p.validate());
  }
}

TEST_CASE("lti rhs is A x + B u + G d") {
  predfb::LtiPlant p;
  p.A = Mat{{0.0, 1.0}, {-2.0, -3.0}};
  p.B = Vec{0.0, 1.0};
  p.G = Mat{{1.0, 0.0}, {0.0, 2.0}};
  p.c = Vec{1.0, 0.0};
  const Vec x{1.0, -1.0};
  const Vec d{0.5, 0.25};
  Vec out(2);
  p.rhs(x, 4.0, d, out);
  CHECK(out[0] == doctest::Approx(-1.0 + 0.5).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-2.0 + 3.0 + 4.0 + 0.5).epsilon(1e-15));

  p.G = Mat{};  // no disturbance channel: d is ignored
  p.rhs(x, 4.0, d, out);
  CHECK(out[0] == -1.0);
  CHECK(out[1] == 5.0);

  Vec bad(3);
  CHECK_THROWS_AS(p.rhs(x, 0.0, d, bad), std::invalid_argument);
}

TEST_SUITE_END();
