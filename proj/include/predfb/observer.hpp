#pragma once

#include "predfb/plants.hpp"
#include "predfb/sim_log.hpp"

// Hybrid high-gain sampled-data observers. Between samples the observer
// integrates a copy of the plant driven by the innovation z_1 - w, where w
// is a simulated inter-sample output; at each sampling instant w jumps to
// the fresh measurement. The estimate z tracks the delayed state x(t - r).

namespace predfb {

struct ObserverState {
  Vec z;
  double w = 0.0;
};

struct ObserverGains {
  double theta = 1.0;  // high-gain parameter, >= 1
  Vec p;               // injection vector; A + p c' must be Hurwitz

  void validate(int n) const;
};

// Benchmark gains: theta = 1, p = (-3, -3)'.
ObserverGains benchmark_observer_gains();

// Continuous-phase derivatives (n z-components then w):
//   z_i' = f_i(z_1..z_i) + z_{i+1} + theta^i p_i (z_1 - w)      i < n
//   z_n' = f_n(z) + theta^n p_n (z_1 - w) + u_delayed
//   w'   = f_1(z_1) + z_2
// Requires n >= 2 (the w dynamics read z_2).
Vec observer_flow(const ObserverState& state, double u_delayed, const StrictFeedbackPlant& plant,
                  const ObserverGains& gains);

// Sample event: w <- y_sample, z unchanged.
ObserverState observer_jump(const ObserverState& state, double y_sample);

// Linear counterpart:
//   z' = A z + B u_delayed + p (c'z - w),   w' = c'A z + c'B u_delayed.
Vec lti_observer_flow(const Vec& z, double w, double u_delayed, const Mat& A, const Vec& B,
                      const Vec& c, const Vec& p);

// Growth rate of the observer energy |z|^2 + w^2 between samples:
//   omega = max(L(n+1) + 2 + 2n max_i theta^{2i} p_i^2, 1 + L^2) / 2.
double observer_growth_rate(const StrictFeedbackPlant& plant, const ObserverGains& gains);

struct BoundCheck {
  bool holds = true;
  double worst_margin = 0.0;  // min over rows of log(rhs) - log(lhs)
  double worst_time = 0.0;
};

// Verifies the a-priori observer energy bound pointwise along a log:
//   |z(t)|^2 + w(t)^2 <= e^{2 omega t} ( |z0|^2 + w0^2
//       + (sup|x(.-r)| + sup|xi|)^2 / (1 - e^{-2 omega T1 e^{-sup b}})
//       + sup|u(.-r-tau)|^2 / (2 omega) ),
// with every sup taken over the prefix up to the row's time. Both sides are
// compared in log space (the right side overflows doubles for long runs).
BoundCheck energy_bound_check(const SimulationLog& log, const StrictFeedbackPlant& plant,
                              const ObserverGains& gains);

}  // namespace predfb
