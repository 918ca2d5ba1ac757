#pragma once

#include <array>
#include <span>

#include "predfb/plants.hpp"
#include "predfb/signals.hpp"

// Exact dead-beat observer/predictor machinery for the third-order
// feedforward chain under sample-and-hold control with measurement delay r
// and input delay tau, r + tau in (0, T). Everything here is closed form:
// the flow map integrates in closed form per constant input segment, the
// one-period transition exposes the polynomial input moments, and the state
// is reconstructed exactly from finitely many delayed output samples.
// The history indexing below is written for the implemented regime
// (hold period T, delay split with l = 0, i.e. r + tau < T); the same
// bookkeeping extends to l > 0 or r + tau = 0 by shifting input indices,
// which is left as a documented extension point.

namespace predfb {

// Input moments of one period [0, T) split as u1 on [0, delta), u2 on
// [delta, T), plus the derived reconstruction coefficients:
//   q1 = int u,  q2 = int int u,
//   g2 = int (1+u) int u,  g3 = third-order moment entering the x3 row,
//   b, c = the affine coefficients of the two-output x2 recovery.
struct TransitionCoeffs {
  double q1 = 0, q2 = 0, g2 = 0, g3 = 0, b = 0, c = 0;
};

TransitionCoeffs transition_coeffs(double u1, double u2, double T, double delta);

// Second-difference decomposition for the one-output recovery: denominator
// multiplying x1 and the input-only offset, for consecutive input pairs
// (u1, u2) then (v1, v2).
double reconstruction_denominator(double u1, double u2, double v1, double v2, double T,
                                  double delta);
double second_difference_offset(double u1, double u2, double v1, double v2, double T,
                                double delta);

// Closed-form flow of the delay-free feedforward chain from x over [0, t]
// driven by the piecewise-constant input u (domain must cover [0, t)).
std::array<double, 3> solution_map(double t, const std::array<double, 3>& x,
                                   const PiecewiseConstantSignal& u);

// One-period transition x(i+1) = F(x(i), u1, u2) with the delta-split input.
std::array<double, 3> transition_F(const std::array<double, 3>& x, double u1, double u2,
                                   double T, double delta);

// State at the current sample from outputs (x1, x3) at the previous and
// current samples and the one period of inputs in between.
// y1 = (x1 at i-1, x1 at i), y2 = (x3 at i-1, x3 at i), u = (u_{i-2}, u_{i-1}).
std::array<double, 3> reconstruct_two_output(const std::array<double, 2>& y1,
                                             const std::array<double, 2>& y2,
                                             const std::array<double, 2>& u, double T,
                                             double delta);

// State at the current sample from three consecutive x3 samples
// (y_{i-2}, y_{i-1}, y_i) and inputs (u_{i-3}, u_{i-2}, u_{i-1}).
// Requires |u_j| <= eps < 1/6 so the denominator stays >= (1-6*eps) T^2.
std::array<double, 3> reconstruct_one_output(const std::array<double, 3>& y,
                                             const std::array<double, 3>& u, double T,
                                             double delta, double eps);

// Predicted state delta = r + tau ahead under the constant input u_prev.
std::array<double, 3> predict_ff(const std::array<double, 3>& x, double u_prev, double delta);

// Saturated nominal feedback with three regions selected by |x1| >= R1 and
// sqrt(x2^2 + (x1+x2)^2) >= R2; |value| <= max(K0, R1+K1, 2*R2+K2).
struct FeedforwardGains {
  double K0 = 0, K1 = 0, K2 = 0, R1 = 0, R2 = 0;
  double bound() const;
};

double nominal_feedback(const std::array<double, 3>& x, const FeedforwardGains& gains);

// One controller update at sample index i = y_history.size() - 1:
// reconstruct the delayed state from the freshest samples, predict r + tau
// ahead, and apply the nominal feedback. During warm-up (too few samples)
// returns warmup_input. Histories are newest-last; y entries hold (x1, x3)
// samples in the two-output case and (x3, unused) in the one-output case;
// u_history holds u_0 .. u_{i-1}.
double control_step(OutputCase output_case, std::span<const std::array<double, 2>> y_history,
                    std::span<const double> u_history, double T, double delta,
                    const FeedforwardGains& gains, double warmup_input);

// Samples of warm-up needed before control_step can reconstruct.
int reconstruction_warmup(OutputCase output_case);

}  // namespace predfb
