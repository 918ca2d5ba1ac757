#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "predfb/approx_predictor.hpp"

using predfb::HistoryWindow;
using predfb::PiecewiseConstantSignal;
using predfb::PredictorConfig;
using predfb::StrictFeedbackPlant;
using predfb::Vec;

namespace {

// Random input over [0, window) with 1-4 interior breakpoints.
PiecewiseConstantSignal random_window(std::mt19937_64& rng, double window) {
  std::uniform_int_distribution<int> nseg(1, 4);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::uniform_real_distribution<double> val(-2.0, 2.0);
  const int segs = nseg(rng);
  std::vector<double> bp{0.0};
  for (int j = 1; j < segs; ++j) bp.push_back(window * unit(rng));
  bp.push_back(window);
  std::sort(bp.begin(), bp.end());
  for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
    if (!(bp[j] < bp[j + 1])) bp[j + 1] = std::nextafter(bp[j], window);
  }
  std::vector<double> vals;
  for (int j = 0; j < segs; ++j) vals.push_back(val(rng));
  return PiecewiseConstantSignal(bp, vals);
}

predfb::Vec plant_vec_rhs(const StrictFeedbackPlant& plant, const Vec& x, double u) {
  Vec out(x.size());
  plant.rhs(x, u, {}, out);
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("approx_predictor");

TEST_CASE("single-sweep closed form on a two-state plant") {
  // One Picard sweep from the constant embedding under a constant input is
  // exactly (z1 + h (f1(z1) + z2), z2 + h u): every integrand is constant
  // along the embedding, so the quadrature is exact at any resolution.
  const auto plant = predfb::benchmark_plant();  // window r + tau = 0.5
  PredictorConfig cfg;
  cfg.l = 1;
  cfg.m = 1;
  const double h = plant.r + plant.tau;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int probe = 0; probe < 1000; ++probe) {
    const Vec z{coord(rng), coord(rng)};
    const double u = coord(rng);
    const auto got =
        predfb::predict_lm(z, PiecewiseConstantSignal::constant(u, 0.0, h), cfg, plant);
    const double f1 = plant.f_eval(0, z);
    CHECK(std::fabs(got[0] - (z[0] + h * (f1 + z[1]))) <= 1e-12 * (1.0 + std::fabs(got[0])));
    CHECK(std::fabs(got[1] - (z[1] + h * u)) <= 1e-12 * (1.0 + std::fabs(got[1])));
  }
}

TEST_CASE("worked single-sweep values") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  const Vec z{1.0, 1.0};
  const auto at_rest =
      predfb::predict_lm(z, PiecewiseConstantSignal::constant(0.0, 0.0, 0.5), cfg, plant);
  // f1(1) = 1/sqrt(2); z1 + 0.5 (f1 + 1) = 1.8535533905932737...
  CHECK(at_rest[0] == doctest::Approx(1.8535533905932737).epsilon(1e-15));
  CHECK(at_rest[1] == 1.0);
  const auto driven =
      predfb::predict_lm(z, PiecewiseConstantSignal::constant(-2.0, 0.0, 0.5), cfg, plant);
  CHECK(driven[0] == doctest::Approx(1.8535533905932737).epsilon(1e-15));
  CHECK(driven[1] == doctest::Approx(0.0).epsilon(1e-15));  // z2 + h u = 1 - 1
}

TEST_CASE("iteration is exact on the integrator chain after n sweeps") {
  const auto chain = predfb::linear_chain_plant(2, 0.25, 0.25);
  PredictorConfig cfg;
  cfg.l = 2;
  cfg.m = 1;
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int probe = 0; probe < 50; ++probe) {
    const Vec z{coord(rng), coord(rng)};
    const double u = coord(rng);
    const double h = 0.5;
    const auto got =
        predfb::predict_lm(z, PiecewiseConstantSignal::constant(u, 0.0, h), cfg, chain);
    // Exact double-integrator flow: the l = n iterate already contains every
    // power of t the solution has, and the trapezoid sums are exact because
    // each lane is piecewise linear on the grid.
    CHECK(std::fabs(got[0] - (z[0] + h * z[1] + 0.5 * h * h * u)) <= 1e-13 * (1.0 + std::fabs(got[0])));
    CHECK(std::fabs(got[1] - (z[1] + h * u)) <= 1e-13 * (1.0 + std::fabs(got[1])));
  }
}

TEST_CASE("reference flow matches closed forms and the independent oracle") {
  const auto chain = predfb::linear_chain_plant(2, 0.25, 0.25);
  const auto u = PiecewiseConstantSignal::constant(1.5, 0.0, 0.5);
  const auto end = predfb::reference_flow(chain, {1.0, -1.0}, u, 0.5);
  CHECK(end[0] == doctest::Approx(1.0 - 0.5 + 0.5 * 0.25 * 1.5).epsilon(1e-13));
  CHECK(end[1] == doctest::Approx(-1.0 + 0.75).epsilon(1e-13));

  const auto plant = predfb::benchmark_plant();
  std::mt19937_64 rng(23);
  for (int probe = 0; probe < 10; ++probe) {
    const auto w = random_window(rng, 0.5);
    const Vec x0{1.3, -0.4};
    const auto got = predfb::reference_flow(plant, x0, w, 0.5);
    const Vec ref = oracle::flow_zoh(
        [&](const Vec& x, double uv) { return plant_vec_rhs(plant, x, uv); }, w, x0, 0.0, 0.5);
    CHECK(std::fabs(got[0] - ref[0]) <= 1e-10 * (1.0 + std::fabs(ref[0])));
    CHECK(std::fabs(got[1] - ref[1]) <= 1e-10 * (1.0 + std::fabs(ref[1])));
  }
}

TEST_CASE("sweep count drives geometric error decay below the contraction factor") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  cfg.m = 2;  // rho = (2 L + 1) * 0.25 < 1
  const double L = 4.0 * std::sqrt(2.0) / (3.0 * std::sqrt(3.0));
  CHECK(cfg.contraction(plant) == doctest::Approx(0.25 * (2.0 * L + 1.0)).epsilon(1e-15));
  std::mt19937_64 rng(24);
  for (int probe = 0; probe < 3; ++probe) {
    const auto u = random_window(rng, 0.5);
    const Vec x0{1.0 + 0.3 * probe, -1.0 + 0.4 * probe};
    const Vec truth = predfb::reference_flow(plant, x0, u, 0.5);
    double prev_err = -1.0;
    for (int l = 1; l <= 7; ++l) {
      cfg.l = l;
      const Vec pred = predfb::predict_lm(x0, u, cfg, plant);
      double err = 0.0;
      for (std::size_t i = 0; i < pred.size(); ++i) err += (pred[i] - truth[i]) * (pred[i] - truth[i]);
      err = std::sqrt(err);
      if (prev_err > 1e-11) CHECK(err <= 0.85 * prev_err);
      prev_err = err;
    }
  }
}

TEST_CASE("calibrated constant turns the a-priori bound into a true error bound") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  cfg.l = 3;
  cfg.m = 2;
  const double khat = predfb::calibrate_K(cfg, plant, 300, 9);
  CHECK(khat > 0.0);
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int probe = 0; probe < 40; ++probe) {
    const Vec x0{coord(rng), coord(rng)};
    const auto u = random_window(rng, 0.5);
    const Vec pred = predfb::predict_lm(x0, u, cfg, plant);
    const Vec truth = predfb::reference_flow(plant, x0, u, 0.5);
    double err = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) err += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    err = std::sqrt(err);
    const double bound =
        predfb::error_bound(cfg, plant, khat, predfb::norm2(x0), u.sup_abs(0.0, 0.5, false));
    CHECK(err <= bound * (1.0 + 1e-9));
  }
}

TEST_CASE("calibration is monotone in the sample count") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  cfg.l = 2;
  cfg.m = 2;
  const double k_small = predfb::calibrate_K(cfg, plant, 40, 9);
  const double k_large = predfb::calibrate_K(cfg, plant, 200, 9);
  CHECK(k_large >= k_small);  // the longer run extends the shorter probe stream
}

TEST_CASE("grid refinement has converged at the default resolution") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig coarse, fine;
  coarse.l = fine.l = 4;
  coarse.m = fine.m = 2;
  coarse.quad_nodes = 2048;
  fine.quad_nodes = 4096;
  std::mt19937_64 rng(26);
  for (int probe = 0; probe < 5; ++probe) {
    const auto u = random_window(rng, 0.5);
    const Vec x0{1.1, -0.7};
    const Vec a = predfb::predict_lm(x0, u, coarse, plant);
    const Vec b = predfb::predict_lm(x0, u, fine, plant);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::fabs(a[i] - b[i]) <= 1e-8 * (1.0 + std::fabs(b[i])));
  }
}

TEST_CASE("vacuous-contraction configurations are rejected where a bound is claimed") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;  // m = 1: rho = (2 L + 1) / 2 > 1
  CHECK(cfg.contraction(plant) > 1.0);
  CHECK_THROWS_AS(predfb::error_bound(cfg, plant, 1.0, 1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(predfb::calibrate_K(cfg, plant, 10, 1), std::domain_error);
  // The predictor map itself still runs.
  CHECK_NOTHROW(
      predfb::predict_lm({1.0, 1.0}, PiecewiseConstantSignal::constant(0.0, 0.0, 0.5), cfg, plant));
}

TEST_CASE("window adapter matches the standalone predictor") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  cfg.l = 2;
  cfg.m = 2;
  const PiecewiseConstantSignal lane({0.0, 0.6, 1.1, 1.5, 2.0}, {1.0, -0.5, 2.0, 0.25});
  const HistoryWindow w{&lane, 1.8, 0.5, true};
  const Vec z{0.4, -0.9};
  const Vec via_adapter = predfb::phi_lm(z, w, cfg, plant);
  const Vec direct = predfb::predict_lm(z, lane.restricted(1.3, 1.8).translated(-1.3), cfg, plant);
  CHECK(via_adapter[0] == doctest::Approx(direct[0]).epsilon(1e-14));
  CHECK(via_adapter[1] == doctest::Approx(direct[1]).epsilon(1e-14));
  CHECK_THROWS_AS(predfb::phi_lm(z, HistoryWindow{nullptr, 1.0, 0.5, true}, cfg, plant),
                  std::invalid_argument);
}

TEST_CASE("argument validation") {
  const auto plant = predfb::benchmark_plant();
  PredictorConfig cfg;
  cfg.l = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.l = 1;
  cfg.m = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.m = 1;
  cfg.quad_nodes = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.quad_nodes = 64;

  const auto u = PiecewiseConstantSignal::constant(1.0, 0.0, 0.5);
  CHECK_THROWS_AS(predfb::predict_lm({1.0, 2.0, 3.0}, u, cfg, plant), std::invalid_argument);
  const auto too_short = PiecewiseConstantSignal::constant(1.0, 0.0, 0.3);
  CHECK_THROWS_AS(predfb::predict_lm({1.0, 2.0}, too_short, cfg, plant), std::invalid_argument);
  const auto offset_start = PiecewiseConstantSignal::constant(1.0, 0.1, 0.6);
  CHECK_THROWS_AS(predfb::q_operator({1.0, 2.0}, offset_start, 1, 64, plant),
                  std::invalid_argument);
  CHECK_THROWS_AS(predfb::GridFunction::constant(Vec{1.0, 2.0}, 0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(predfb::GridFunction::constant(Vec{1.0, 2.0}, 0.0, 4), std::invalid_argument);
}

TEST_SUITE_END();
