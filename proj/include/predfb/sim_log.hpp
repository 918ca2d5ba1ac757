#pragma once

#include <functional>

#include "predfb/linalg.hpp"
#include "predfb/signals.hpp"

// Simulation log: one row per integration node, strictly increasing in time.
// Rows at event instants are written after the jump (w and u show their
// post-event values; the plant state x is continuous across events). The log
// also carries the run context that the bound checkers need -- the full
// applied input signal (initial history included), the plant's initial state
// history, and the sampling schedule actually used -- so a log is
// self-contained and checkable without the scenario that produced it.

namespace predfb {

struct LogRow {
  double t = 0.0;
  Vec x;             // plant state
  Vec z;             // observer / reconstruction estimate
  double w = 0.0;    // inter-sample output estimate (post-jump at samples)
  double u = 0.0;    // input value applied from this row's time onward
  Vec d;             // disturbance at t
  double xi = 0.0;   // measurement noise at t
  bool sample_event = false;
  bool hold_event = false;
};

struct SimulationLog {
  int n = 0;
  std::vector<LogRow> rows;

  PiecewiseConstantSignal input = PiecewiseConstantSignal::empty(0.0);
  std::function<Vec(double)> x_history;  // state on [-r, 0]
  Vec z0;
  double w0 = 0.0;
  double x0_sup = 0.0;  // sup |x(s)| over the initial window [-r, 0]
  std::vector<double> sample_times;
  std::vector<double> sample_perturbations;  // b at each sampling instant
  double T1 = 0.0, T2 = 0.0, r = 0.0, tau = 0.0;
};

// State at time t: linear interpolation between bracketing rows for t >= 0
// (rows are one integrator substep apart), the stored history for t in
// [-r, 0). Throws std::domain_error outside [-r, last row time].
Vec state_at(const SimulationLog& log, double t);

// sup over rows with row.t <= t of the Euclidean norms |x|, |z| and of |w|.
double sup_state_norm(const SimulationLog& log, double t);

}  // namespace predfb
