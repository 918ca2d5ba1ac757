#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "predfb/signals.hpp"

using predfb::HistoryWindow;
using predfb::PiecewiseConstantSignal;

TEST_SUITE_BEGIN("signals");

TEST_CASE("constructor validates its arguments") {
  CHECK_THROWS_AS(PiecewiseConstantSignal({0.0, 1.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantSignal({0.0, 2.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantSignal({0.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantSignal({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantSignal({0.0, INFINITY}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseConstantSignal({0.0, 1.0}, {NAN}), std::invalid_argument);
  CHECK_NOTHROW(PiecewiseConstantSignal({0.0, 1.0, 2.5}, {3.0, -1.0}));
}

TEST_CASE("evaluation is right-continuous and domain-checked") {
  const PiecewiseConstantSignal u({0.0, 1.0, 2.0}, {5.0, -7.0});
  CHECK(u(0.0) == 5.0);
  CHECK(u(1.0 - 1e-12) == 5.0);
  CHECK(u(1.0) == -7.0);  // value jumps at the breakpoint, new value applies at it
  CHECK(u(1.999999) == -7.0);
  CHECK_THROWS_AS(u(-1e-12), std::domain_error);
  CHECK_THROWS_AS(u(2.0), std::domain_error);
  CHECK_THROWS_AS(PiecewiseConstantSignal::empty(0.0)(0.0), std::domain_error);
}

TEST_CASE("integral is exact on segment-aligned and straddling windows") {
  const PiecewiseConstantSignal u({0.0, 0.5, 1.25, 2.0}, {2.0, -4.0, 8.0});
  CHECK(u.integral(0.0, 2.0) == doctest::Approx(2.0 * 0.5 - 4.0 * 0.75 + 8.0 * 0.75).epsilon(1e-15));
  CHECK(u.integral(0.25, 0.75) == doctest::Approx(2.0 * 0.25 - 4.0 * 0.25).epsilon(1e-15));
  CHECK(u.integral(1.0, 1.0) == 0.0);
  // Additivity over an interior split point.
  const double whole = u.integral(0.1, 1.9);
  const double split = u.integral(0.1, 0.77) + u.integral(0.77, 1.9);
  CHECK(whole == doctest::Approx(split).epsilon(1e-15));
  CHECK_THROWS_AS(u.integral(-0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(u.integral(0.0, 2.1), std::domain_error);
  CHECK_THROWS_AS(u.integral(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("sup_abs distinguishes open and closed right endpoints") {
  const PiecewiseConstantSignal u({0.0, 1.0, 2.0}, {1.0, -9.0});
  CHECK(u.sup_abs(0.0, 1.0, false) == 1.0);   // [0,1) never sees the second segment
  CHECK(u.sup_abs(0.0, 1.0, true) == 9.0);    // closed right endpoint reads u(1) = -9
  CHECK(u.sup_abs(0.0, 2.0, true) == 9.0);    // b == domain_end: no extra point to read
  CHECK(u.sup_abs(0.5, 0.5, true) == 1.0);    // degenerate closed window = point read
  CHECK_THROWS_AS(u.sup_abs(0.5, 0.5, false), std::invalid_argument);
}

TEST_CASE("translated and restricted preserve values") {
  const PiecewiseConstantSignal u({0.0, 1.0, 2.0}, {3.0, 4.0});
  const auto v = u.translated(10.0);
  CHECK(v.domain_start() == 10.0);
  CHECK(v(10.5) == 3.0);
  CHECK(v(11.5) == 4.0);

  const auto w = u.restricted(0.5, 1.5);
  CHECK(w.domain_start() == 0.5);
  CHECK(w.domain_end() == 1.5);
  CHECK(w(0.5) == 3.0);
  CHECK(w(1.0) == 4.0);
  CHECK(w.integral(0.5, 1.5) == doctest::Approx(u.integral(0.5, 1.5)).epsilon(1e-15));
  // Restriction may touch domain_end but not exceed it.
  CHECK_NOTHROW(u.restricted(1.0, 2.0));
  CHECK_THROWS_AS(u.restricted(1.0, 2.0 + 1e-9), std::domain_error);
  CHECK_THROWS_AS(u.restricted(1.0, 1.0), std::invalid_argument);

  // A pair of breakpoints closer than one ulp at the shifted magnitude
  // collapses onto a single double after translation; the zero-width segment
  // disappears instead of tripping the strict-ascent validation.
  const double lo = 0.01;
  const double hi = std::nextafter(lo, 1.0);
  const PiecewiseConstantSignal sliver({0.0, lo, hi, 0.2}, {1.0, 2.0, 3.0});
  REQUIRE(0.25 + lo == 0.25 + hi);  // the collapse this test exercises
  const auto shifted = sliver.translated(0.25);
  CHECK(shifted.domain_start() == 0.25);
  CHECK(shifted.domain_end() == 0.25 + 0.2);
  CHECK(shifted(0.25) == 1.0);
  CHECK(shifted(0.25 + lo) == 3.0);
  CHECK(shifted(0.4) == 3.0);
}

TEST_CASE("append with exact durations reproduces the uniform hold grid bitwise") {
  // The engine extends the input lane one hold at a time with duration
  // next_hold - domain_end. For a uniform grid j*T the addition
  // domain_end + (next - domain_end) must return next exactly, so the input
  // breakpoints coincide bit-for-bit with the hold instants.
  const double T = 0.01;  // deliberately not representable as a dyadic rational
  PiecewiseConstantSignal u = PiecewiseConstantSignal::empty(0.0);
  for (int j = 1; j <= 1000; ++j) {
    const double next = j * T;
    u.append(static_cast<double>(j), next - u.domain_end());
  }
  const auto& bps = u.breakpoints();
  REQUIRE(bps.size() == 1001);
  for (int j = 0; j <= 1000; ++j) CHECK(bps[static_cast<std::size_t>(j)] == j * T);
  CHECK_THROWS_AS(u.append(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(u.append(NAN, 1.0), std::invalid_argument);
}

TEST_CASE("shift_delay and zoh_extend") {
  const PiecewiseConstantSignal u({0.0, 1.0}, {6.0});
  const auto d = predfb::shift_delay(u, 0.25);
  CHECK(d(0.25) == 6.0);
  CHECK(d.domain_end() == 1.25);
  CHECK_THROWS_AS(predfb::shift_delay(u, -0.1), std::invalid_argument);

  const auto e = predfb::zoh_extend(u, -2.0, 0.5);
  CHECK(e.domain_end() == 1.5);
  CHECK(e(1.2) == -2.0);
  CHECK(u.domain_end() == 1.0);  // the source is untouched
}

TEST_CASE("history window sup norm") {
  const PiecewiseConstantSignal u({0.0, 1.0, 2.0, 3.0}, {1.0, -5.0, 2.0});
  CHECK(predfb::sup_norm(HistoryWindow{&u, 2.0, 1.0, true}) == 5.0);
  CHECK(predfb::sup_norm(HistoryWindow{&u, 1.0, 1.0, false}) == 1.0);
  CHECK(predfb::sup_norm(HistoryWindow{&u, 1.0, 1.0, true}) == 5.0);
  CHECK_THROWS_AS(predfb::sup_norm(HistoryWindow{nullptr, 1.0, 1.0, true}), std::invalid_argument);
  CHECK_THROWS_AS(predfb::sup_norm(HistoryWindow{&u, 1.0, -1.0, true}), std::invalid_argument);
}

TEST_CASE("sampling schedule gaps follow T1 * exp(-b)") {
  const double T1 = 0.3;
  auto b = [](double t) { return 0.5 * (1.0 + std::sin(3.0 * t)); };
  const auto s = predfb::generate_schedule(T1, b, 5.0);
  REQUIRE(s.times.size() >= 2);
  CHECK(s.times.front() == 0.0);
  CHECK(s.times.back() >= 5.0);
  CHECK(s.nominal_period == T1);
  REQUIRE(s.gaps.size() == s.times.size() - 1);
  REQUIRE(s.perturbations.size() == s.gaps.size());
  double sup_b = 0.0;
  for (std::size_t i = 0; i < s.gaps.size(); ++i) {
    CHECK(s.times[i + 1] > s.times[i]);
    CHECK(s.times[i + 1] == s.times[i] + s.gaps[i]);
    CHECK(s.gaps[i] == T1 * std::exp(-s.perturbations[i]));
    CHECK(s.perturbations[i] == b(s.times[i]));
    sup_b = std::max(sup_b, s.perturbations[i]);
  }
  CHECK(s.sup_perturbation() == sup_b);
  // All but the last sample lie strictly before the horizon.
  CHECK(s.times[s.times.size() - 2] < 5.0);
}

TEST_CASE("sampling schedule rejects invalid inputs") {
  CHECK_THROWS_AS(predfb::generate_schedule(0.0, nullptr, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(predfb::generate_schedule(-0.1, nullptr, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(predfb::generate_schedule(0.1, nullptr, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(predfb::generate_schedule(0.1, [](double) { return -0.2; }, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(predfb::generate_schedule(0.1, [](double) { return NAN; }, 1.0),
                  std::invalid_argument);
  // Null perturbation callback means b == 0: a uniform grid.
  const auto s = predfb::generate_schedule(0.25, nullptr, 1.0);
  REQUIRE(s.times.size() == 5);
  CHECK(s.times[4] == 1.0);
}

TEST_SUITE_END();
