#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "predfb/linalg.hpp"

// The three plant families driven by the simulation engine:
//  - strict-feedback chains  x_i' = f_i(x_1..x_i) + x_{i+1} + g_i(x,u) d_i,
//    x_n' = f_n(x) + u(t - tau) + g_n(x,u) d_n, with globally Lipschitz f;
//  - a third-order feedforward chain with input-dependent coupling;
//  - linear time-invariant systems x' = A x + B u(t - tau) + G d.
// Measurements are sampled and delayed by r; inputs are zero-order-hold and
// delayed by tau. Delay bookkeeping lives in the runner; plants only expose
// the instantaneous right-hand sides.

namespace predfb {

// Radial saturation x / max(1, |x|): identity on [-1, 1], unit norm outside.
double saturation(double x);

using ComponentFn = std::function<double(std::span<const double>)>;     // f_i(x_1..x_i)
using DisturbanceGainFn = std::function<double(std::span<const double>, double)>;  // g_i(x, u)

struct StrictFeedbackPlant {
  int n = 0;
  std::vector<ComponentFn> f;        // size n; f[i] reads the prefix x_1..x_{i+1}
  std::vector<DisturbanceGainFn> g;  // size n or empty (empty means g_i == 1)
  double lipschitz = 0.0;            // global Lipschitz constant L of the f_i
  double disturbance_bound = 1.0;    // G >= sup |g_i|
  double r = 0.0, tau = 0.0;         // measurement and input delays

  double f_eval(int i, std::span<const double> x) const;
  double g_eval(int i, std::span<const double> x, double u) const;
  // out_i = f_i + x_{i+1} + g_i d_i (last row gets u_delayed instead of x_{n+1}).
  void rhs(std::span<const double> x, double u_delayed, std::span<const double> d,
           std::span<double> out) const;
};

// Benchmark instance: n = 2, f_1(x) = sgn(x) x^2 / sqrt(1+x^2), f_2 = 0,
// L = 4*sqrt(2)/(3*sqrt(3)), unit disturbance gains.
StrictFeedbackPlant benchmark_plant(double r = 0.25, double tau = 0.25);

// Pure chain of integrators in strict-feedback form (f == 0, L = 0).
StrictFeedbackPlant linear_chain_plant(int n, double r, double tau);

// Spot-checks the declared constants (f_i(0) = 0, Lipschitz bound, |g| bound)
// on random probes; throws std::invalid_argument on violation.
void validate_plant(const StrictFeedbackPlant& plant, int probes, std::uint64_t seed);

// Coarse a-priori solution bound for strict-feedback trajectories:
//   (x0_norm + (G d_sup + u_sup) / sqrt((n+1)L + 3)) * exp(((n+1)L + 3) t / 2).
double growth_envelope(const StrictFeedbackPlant& plant, double x0_norm, double d_sup,
                       double u_sup, double t);

enum class OutputCase {
  TwoOutput,  // measures (x1, x3); one sample of warm-up
  OneOutput   // measures x3 only; needs bounded inputs and two samples of warm-up
};

// Third-order feedforward chain:
//   x1' = u(t - tau),  x2' = x1 + x1 u(t - tau),  x3' = x2 + x1^2.
struct FeedforwardPlant {
  double r = 0.0, tau = 0.0;  // r + tau must lie in (0, T)
  double T = 0.0;             // common sampling/holding period
  double eps = 0.0;           // input bound, required < 1/6 in the one-output case
  OutputCase output_case = OutputCase::TwoOutput;
  void validate() const;
};

void feedforward_rhs(std::span<const double> x, double u_delayed, std::span<double> out);

struct LtiPlant {
  Mat A;
  Vec B;
  Mat G;  // disturbance input matrix (may be empty for no disturbance)
  Vec c;  // measurement row
  double r = 0.0, tau = 0.0;
  void rhs(std::span<const double> x, double u_delayed, std::span<const double> d,
           std::span<double> out) const;
};

}  // namespace predfb
