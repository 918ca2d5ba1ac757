#include "predfb/signals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

PiecewiseConstantSignal::PiecewiseConstantSignal(std::vector<double> breakpoints,
                                                 std::vector<double> values)
    : breaks_(std::move(breakpoints)), values_(std::move(values)) {
  if (breaks_.empty()) throw std::invalid_argument("signal: at least one breakpoint required");
  if (values_.size() + 1 != breaks_.size())
    throw std::invalid_argument("signal: values/breakpoints size mismatch");
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i] < breaks_[i + 1]))
      throw std::invalid_argument("signal: breakpoints must be strictly ascending");
  for (double b : breaks_)
    if (!std::isfinite(b)) throw std::invalid_argument("signal: non-finite breakpoint");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("signal: non-finite value");
}

PiecewiseConstantSignal PiecewiseConstantSignal::constant(double value, double t0, double t1) {
  return PiecewiseConstantSignal({t0, t1}, {value});
}

PiecewiseConstantSignal PiecewiseConstantSignal::empty(double t0) {
  return PiecewiseConstantSignal({t0}, {});
}

std::size_t PiecewiseConstantSignal::segment_index(double t) const {
  // Largest j with breaks_[j] <= t; caller guarantees t is in the domain.
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return static_cast<std::size_t>(it - breaks_.begin()) - 1;
}

double PiecewiseConstantSignal::operator()(double t) const {
  if (values_.empty() || t < domain_start() || t >= domain_end())
    throw std::domain_error("signal: evaluation outside domain");
  return values_[segment_index(t)];
}

double PiecewiseConstantSignal::integral(double a, double b) const {
  if (!(a <= b)) throw std::invalid_argument("signal: integral bounds out of order");
  if (a < domain_start() || b > domain_end())
    throw std::domain_error("signal: integral bounds outside domain");
  if (a == b) return 0.0;
  double acc = 0.0;
  std::size_t j = segment_index(a);
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, breaks_[j + 1]);
    acc += values_[j] * (hi - lo);
    lo = hi;
    ++j;
  }
  return acc;
}

double PiecewiseConstantSignal::sup_abs(double a, double b, bool closed_right) const {
  if (!(a <= b)) throw std::invalid_argument("signal: sup bounds out of order");
  if (a < domain_start() || b > domain_end())
    throw std::domain_error("signal: sup bounds outside domain");
  if (a == b && !closed_right) throw std::invalid_argument("signal: empty open window");
  double m = 0.0;
  if (a < b) {
    std::size_t j = segment_index(a);
    for (; j < values_.size() && breaks_[j] < b; ++j) m = std::max(m, std::fabs(values_[j]));
  }
  if (closed_right && b < domain_end()) m = std::max(m, std::fabs((*this)(b)));
  return m;
}

PiecewiseConstantSignal PiecewiseConstantSignal::translated(double offset) const {
  if (!std::isfinite(offset)) throw std::invalid_argument("signal: non-finite offset");
  std::vector<double> nb(breaks_);
  for (double& b : nb) b += offset;
  std::vector<double> nv(values_);
  // Rounding the shifted breakpoints can merge a pair that was less than one
  // ulp apart at the new magnitude; the segment between them has zero width
  // after the shift, so drop it instead of failing validation.
  for (std::size_t i = 0; i + 1 < nb.size();) {
    if (nb[i + 1] <= nb[i]) {
      nb.erase(nb.begin() + static_cast<std::ptrdiff_t>(i + 1));
      nv.erase(nv.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  return PiecewiseConstantSignal(std::move(nb), std::move(nv));
}

PiecewiseConstantSignal PiecewiseConstantSignal::restricted(double a, double b) const {
  if (!(a < b)) throw std::invalid_argument("signal: empty restriction");
  if (a < domain_start() || b > domain_end())
    throw std::domain_error("signal: restriction outside domain");
  std::vector<double> nb{a};
  std::vector<double> nv;
  std::size_t j = segment_index(a);
  for (; j < values_.size() && breaks_[j] < b; ++j) {
    nv.push_back(values_[j]);
    nb.push_back(std::min(b, breaks_[j + 1]));
  }
  return PiecewiseConstantSignal(std::move(nb), std::move(nv));
}

void PiecewiseConstantSignal::append(double value, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("signal: nonpositive hold duration");
  if (!std::isfinite(value)) throw std::invalid_argument("signal: non-finite hold value");
  breaks_.push_back(breaks_.back() + duration);
  values_.push_back(value);
}

double sup_norm(const HistoryWindow& w) {
  if (w.signal == nullptr) throw std::invalid_argument("history window: null signal");
  if (!(w.length >= 0.0)) throw std::invalid_argument("history window: negative length");
  return w.signal->sup_abs(w.anchor - w.length, w.anchor, w.closed);
}

PiecewiseConstantSignal shift_delay(const PiecewiseConstantSignal& u, double lag) {
  if (!(lag >= 0.0)) throw std::invalid_argument("shift_delay: negative lag");
  return u.translated(lag);
}

PiecewiseConstantSignal zoh_extend(const PiecewiseConstantSignal& u, double value, double hold_period) {
  PiecewiseConstantSignal out = u;
  out.append(value, hold_period);
  return out;
}

double SamplingSchedule::sup_perturbation() const {
  double m = 0.0;
  for (double b : perturbations) m = std::max(m, b);
  return m;
}

SamplingSchedule generate_schedule(double T1, const std::function<double(double)>& b, double horizon) {
  if (!(T1 > 0.0) || !std::isfinite(T1)) throw std::invalid_argument("schedule: T1 must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("schedule: bad horizon");
  SamplingSchedule s;
  s.nominal_period = T1;
  s.times.push_back(0.0);
  // Perturbations shrink gaps, so the count is bounded once sup b is seen;
  // the hard cap guards against unbounded b sequences.
  constexpr std::size_t kMaxEvents = 50'000'000;
  while (s.times.back() < horizon) {
    const double bi = b ? b(s.times.back()) : 0.0;
    if (!std::isfinite(bi) || bi < 0.0)
      throw std::invalid_argument("schedule: perturbation must be finite and >= 0");
    const double gap = T1 * std::exp(-bi);
    s.perturbations.push_back(bi);
    s.gaps.push_back(gap);
    s.times.push_back(s.times.back() + gap);
    if (s.times.size() > kMaxEvents) throw std::runtime_error("schedule: event count overflow");
  }
  return s;
}

}  // namespace predfb
