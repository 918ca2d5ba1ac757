#pragma once

#include <cstdint>
#include <functional>
#include <vector>

// Signal carriers for sampled-data loops: zero-order-hold input lanes,
// history windows for delay reads, and event-driven sampling schedules.

namespace predfb {

// Right-continuous step function on [domain_start, domain_end).
// Segment j holds values()[j] on [breakpoints()[j], breakpoints()[j+1]).
class PiecewiseConstantSignal {
 public:
  // breakpoints strictly ascending, values.size() == breakpoints.size() - 1.
  PiecewiseConstantSignal(std::vector<double> breakpoints, std::vector<double> values);

  static PiecewiseConstantSignal constant(double value, double t0, double t1);
  // Degenerate signal with empty domain anchored at t0; usable only via append.
  static PiecewiseConstantSignal empty(double t0);

  double domain_start() const { return breaks_.front(); }
  double domain_end() const { return breaks_.back(); }
  std::size_t segment_count() const { return values_.size(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  // Value at t; throws std::domain_error outside [domain_start, domain_end).
  double operator()(double t) const;

  // Exact integral over [a, b] ⊆ [domain_start, domain_end].
  double integral(double a, double b) const;

  // max |value| over [a, b) -- plus the value at b itself when closed_right
  // and b is interior to the domain.
  double sup_abs(double a, double b, bool closed_right) const;

  // Domain translation by any offset (value(t) = old(t - offset)).
  PiecewiseConstantSignal translated(double offset) const;

  // Restriction to [a, b), which must lie inside the domain.
  PiecewiseConstantSignal restricted(double a, double b) const;

  // Appends one segment of the given duration at domain_end (in-place ZOH
  // extension used by the simulation engine; see zoh_extend for the pure form).
  void append(double value, double duration);

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
  std::size_t segment_index(double t) const;
};

// Backward-looking window [anchor - length, anchor] (or right-open when
// closed == false) over a signal. The window must lie inside the signal
// domain, except that the right endpoint may touch domain_end.
struct HistoryWindow {
  const PiecewiseConstantSignal* signal = nullptr;
  double anchor = 0.0;
  double length = 0.0;
  bool closed = true;
};

// Essential sup of |signal| over the window.
double sup_norm(const HistoryWindow& w);

// Signal delayed by lag >= 0: output(t) = u(t - lag).
PiecewiseConstantSignal shift_delay(const PiecewiseConstantSignal& u, double lag);

// Pure ZOH extension: copy of u with one new segment of length hold_period.
PiecewiseConstantSignal zoh_extend(const PiecewiseConstantSignal& u, double value, double hold_period);

// Sampling instants tau_0 = 0 < tau_1 < ... with gaps T1 * exp(-b(tau_i)).
// Times are accumulated by summing the generated gaps; the gaps and the
// perturbation trace are stored so they stay exact as generated.
struct SamplingSchedule {
  std::vector<double> times;
  std::vector<double> gaps;           // gaps[i] = generated tau_{i+1} - tau_i
  std::vector<double> perturbations;  // b(tau_i) for each generated gap
  double nominal_period = 0.0;        // T1
  double sup_perturbation() const;
};

// Generates the schedule until it covers [0, horizon] (the last time is the
// first one >= horizon). b must return finite values >= 0.
SamplingSchedule generate_schedule(double T1, const std::function<double(double)>& b, double horizon);

}  // namespace predfb
