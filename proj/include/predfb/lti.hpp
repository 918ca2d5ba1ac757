#pragma once

#include <span>
#include <utility>

#include "predfb/linalg.hpp"
#include "predfb/signals.hpp"
#include "predfb/sim_log.hpp"

// Exact predictor machinery for linear plants x' = Ax + Bu(t - tau) with
// delayed sampled output y = c'x(t - r): matrix exponentials, zero-order-hold
// segment convolution, pole placement (Ackermann, n <= 4), exact state
// reconstruction from output samples, and a sampled dead-beat demonstration.

namespace predfb {

// e^{At} by scaling and squaring with a Taylor kernel (series tail below
// 1e-16 relative); exp(0) is exactly the identity.
Mat matrix_exponential(const Mat& a, double t);

// int_0^h e^{As} ds via the augmented-matrix exponential; exact for every A
// including singular and nilpotent ones.
Mat integral_exponential(const Mat& a, double h);

// ZOH discretization at period T: (e^{AT}, int_0^T e^{As} ds B).
std::pair<Mat, Vec> zoh_discretization(const Mat& a, const Vec& b, double T);

// Exact forward prediction by the window length W = u_window.length:
// given z = x(t0) and the input segment values on [t0, t0 + W) (stored as the
// backward window anchored where those values live), walks the ZOH segments
// chronologically: state <- e^{A len} state + (int_0^len e^{As} ds) B u_seg.
Vec lti_predict(const Vec& z, const HistoryWindow& u_window, const Mat& a, const Vec& b);

// k' lti_predict(z, u_window): the sampled predictor feedback value.
double lti_control(const Vec& z, const HistoryWindow& u_window, const Vec& k, const Mat& a,
                   const Vec& b);

// Monic characteristic coefficients [c1..cn] of prod (s - root_i).
std::vector<double> poly_from_roots(const std::vector<double>& roots);

// k such that A + B k' has characteristic polynomial
// s^n + c1 s^{n-1} + ... + cn (Ackermann on the controllability matrix).
Vec place_feedback(const Mat& a, const Vec& b, const std::vector<double>& char_coeffs);

// p such that A + p c' has the given characteristic polynomial (duality).
Vec place_injection(const Mat& a, const Vec& c, const std::vector<double>& char_coeffs);

// Discrete dead-beat gain: k with (A_d + B_d k') nilpotent for the ZOH
// discretization at period T.
Vec deadbeat_gain(const Mat& a, const Vec& b, double T);

// Exact reconstruction of the delayed state x(jT - r) from the latest n
// output samples y = (y_{j-n+1}, ..., y_j) (newest last; y_i = c'x(iT - r))
// and the n matching held inputs u = (u_{j-n}, ..., u_{j-1}) (newest last).
// Requires r + tau < T. Throws if (A_d, c) is unobservable.
Vec lti_reconstruct(const Mat& a, const Vec& b, const Vec& c, double T, double r, double tau,
                    std::span<const double> y, std::span<const double> u);

// Closed-loop sampled predictor feedback on the linear plant with delayed
// sampled output, warm-up inputs of 0 until enough samples exist, and
// u_j = k' x(jT + tau) from the reconstructed + predicted state. With the
// default (dead-beat) gain the state hits zero in finitely many periods.
// gain empty selects deadbeat_gain(a, b, T). Defined with the simulation
// engine; declared here with the rest of the linear machinery.
SimulationLog deadbeat_demo(const Mat& a, const Vec& b, const Vec& c, double T, double r,
                            double tau, int horizon_steps, const Vec& x0, Vec gain = {});

}  // namespace predfb
