#include "predfb/exact_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

namespace {

void check_period_split(double T, double delta) {
  if (!(T > 0.0)) throw std::invalid_argument("transition: T must be positive");
  if (!(delta > 0.0 && delta < T))
    throw std::invalid_argument("transition: delta must lie in (0, T)");
}

// Exact flow over a single constant-input segment of length h.
std::array<double, 3> flow_constant(const std::array<double, 3>& x, double u, double h) {
  const double h2 = h * h, h3 = h2 * h;
  std::array<double, 3> out;
  out[0] = x[0] + u * h;
  out[1] = x[1] + (1.0 + u) * (x[0] * h + u * h2 / 2.0);
  out[2] = x[2] + x[1] * h + (1.0 + u) * (x[0] * h2 / 2.0 + u * h3 / 6.0) + x[0] * x[0] * h +
           x[0] * u * h2 + u * u * h3 / 3.0;
  return out;
}

}  // namespace

TransitionCoeffs transition_coeffs(double u1, double u2, double T, double delta) {
  check_period_split(T, delta);
  const double d = delta, e = T - delta;
  TransitionCoeffs k;
  k.q1 = d * u1 + e * u2;
  k.q2 = (d * d / 2.0 + d * e) * u1 + e * e / 2.0 * u2;
  k.g2 = k.q2 + d * d / 2.0 * u1 * u1 + d * e * u1 * u2 + e * e / 2.0 * u2 * u2;
  k.g3 = d / 2.0 * (T * T - T * d + d * d / 3.0) * u1 + e * e * e / 6.0 * u2 +
         3.0 * d * d / 2.0 * (T - 2.0 * d / 3.0) * u1 * u1 + 3.0 * d * e * e / 2.0 * u1 * u2 +
         e * e * e / 2.0 * u2 * u2;
  k.b = -3.0 * k.q2 / T + k.q1 + T / 2.0;
  k.c = k.g2 - k.g3 / T;
  return k;
}

double reconstruction_denominator(double u1, double u2, double v1, double v2, double T,
                                  double delta) {
  const TransitionCoeffs ku = transition_coeffs(u1, u2, T, delta);
  const TransitionCoeffs kv = transition_coeffs(v1, v2, T, delta);
  return T * T + 3.0 * T * ku.q1 + 3.0 * kv.q2 - 3.0 * ku.q2;
}

double second_difference_offset(double u1, double u2, double v1, double v2, double T,
                                double delta) {
  const TransitionCoeffs ku = transition_coeffs(u1, u2, T, delta);
  const TransitionCoeffs kv = transition_coeffs(v1, v2, T, delta);
  return kv.g3 - ku.g3 + T * ku.g2 + 0.5 * (T * T + 6.0 * kv.q2) * ku.q1 + T * ku.q1 * ku.q1;
}

std::array<double, 3> solution_map(double t, const std::array<double, 3>& x,
                                   const PiecewiseConstantSignal& u) {
  if (!(t >= 0.0)) throw std::invalid_argument("solution_map: negative time");
  if (t > 0.0 && (u.domain_start() > 0.0 || u.domain_end() < t))
    throw std::domain_error("solution_map: input does not cover [0, t)");
  std::array<double, 3> state = x;
  if (t == 0.0) return state;
  // March the exact constant-input flow segment by segment.
  const auto& bks = u.breakpoints();
  double lo = 0.0;
  while (lo < t) {
    const double val = u(lo);
    const auto it = std::upper_bound(bks.begin(), bks.end(), lo);
    const double hi = std::min(t, it == bks.end() ? t : *it);
    state = flow_constant(state, val, hi - lo);
    lo = hi;
  }
  return state;
}

std::array<double, 3> transition_F(const std::array<double, 3>& x, double u1, double u2,
                                   double T, double delta) {
  const TransitionCoeffs k = transition_coeffs(u1, u2, T, delta);
  std::array<double, 3> out;
  out[0] = x[0] + k.q1;
  out[1] = x[1] + T * x[0] + x[0] * k.q1 + k.g2;
  out[2] = x[2] + T * (x[1] + x[0] * x[0]) + T * T / 2.0 * x[0] + 3.0 * x[0] * k.q2 + k.g3;
  return out;
}

std::array<double, 3> reconstruct_two_output(const std::array<double, 2>& y1,
                                             const std::array<double, 2>& y2,
                                             const std::array<double, 2>& u, double T,
                                             double delta) {
  const TransitionCoeffs k = transition_coeffs(u[0], u[1], T, delta);
  std::array<double, 3> x;
  x[0] = y1[1];
  x[1] = (y2[1] - y2[0]) / T - y1[0] * y1[0] + y1[0] * k.b + k.c;
  x[2] = y2[1];
  return x;
}

std::array<double, 3> reconstruct_one_output(const std::array<double, 3>& y,
                                             const std::array<double, 3>& u, double T,
                                             double delta, double eps) {
  if (!(eps > 0.0 && eps < 1.0 / 6.0))
    throw std::invalid_argument("one-output reconstruction: eps must lie in (0, 1/6)");
  for (double uj : u)
    if (std::fabs(uj) > eps * (1.0 + 1e-12))
      throw std::invalid_argument("one-output reconstruction: input outside admissible bound");
  // Consecutive input pairs: (u_{i-3}, u_{i-2}) over the older period and
  // (u_{i-2}, u_{i-1}) over the newer one.
  const double den = reconstruction_denominator(u[0], u[1], u[1], u[2], T, delta);
  const double off = second_difference_offset(u[0], u[1], u[1], u[2], T, delta);
  const TransitionCoeffs k_old = transition_coeffs(u[0], u[1], T, delta);
  const TransitionCoeffs k_new = transition_coeffs(u[1], u[2], T, delta);
  const double m = (y[2] - 2.0 * y[1] + y[0] - off) / den + k_old.q1;  // x1 one sample back
  std::array<double, 3> x;
  x[0] = m + k_new.q1;
  x[1] = (y[2] - y[1]) / T - m * m + m * k_new.b + k_new.c;
  x[2] = y[2];
  return x;
}

std::array<double, 3> predict_ff(const std::array<double, 3>& x, double u_prev, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("predict: delta must be positive");
  return flow_constant(x, u_prev, delta);
}

double FeedforwardGains::bound() const {
  return std::max({K0, R1 + K1, 2.0 * R2 + K2});
}

double nominal_feedback(const std::array<double, 3>& x, const FeedforwardGains& gains) {
  const double inner = std::sqrt(x[1] * x[1] + (x[0] + x[1]) * (x[0] + x[1]));
  if (inner >= gains.R2) {
    if (std::fabs(x[0]) >= gains.R1) return -gains.K0 * saturation(x[0]);
    return -x[0] - gains.K1 * saturation(x[1] + x[0]);
  }
  return -2.0 * (x[0] + x[1]) - gains.K2 * saturation(x[2] + x[1] + 0.5 * x[0]);
}

int reconstruction_warmup(OutputCase output_case) {
  return output_case == OutputCase::TwoOutput ? 2 : 3;
}

double control_step(OutputCase output_case, std::span<const std::array<double, 2>> y_history,
                    std::span<const double> u_history, double T, double delta,
                    const FeedforwardGains& gains, double warmup_input) {
  if (y_history.size() != u_history.size() + 1)
    throw std::invalid_argument("control_step: history lengths inconsistent");
  const std::size_t i = y_history.size() - 1;  // current sample index
  const std::size_t need = static_cast<std::size_t>(reconstruction_warmup(output_case));
  if (i < need) return warmup_input;
  std::array<double, 3> state;
  if (output_case == OutputCase::TwoOutput) {
    state = reconstruct_two_output({y_history[i - 1][0], y_history[i][0]},
                                   {y_history[i - 1][1], y_history[i][1]},
                                   {u_history[i - 2], u_history[i - 1]}, T, delta);
  } else {
    // The loop's inputs obey |u| <= gains.bound(); pass that as the
    // admissibility bound (clamped inside the valid (0, 1/6) range).
    const double eps = std::clamp(gains.bound(), 1e-9, 1.0 / 6.0 - 1e-9);
    state = reconstruct_one_output({y_history[i - 2][0], y_history[i - 1][0], y_history[i][0]},
                                   {u_history[i - 3], u_history[i - 2], u_history[i - 1]}, T,
                                   delta, eps);
  }
  const std::array<double, 3> ahead = predict_ff(state, u_history[i - 1], delta);
  return nominal_feedback(ahead, gains);
}

}  // namespace predfb
