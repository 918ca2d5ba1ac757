#pragma once

#include <cstdint>

#include "predfb/linalg.hpp"
#include "predfb/observer.hpp"
#include "predfb/plants.hpp"

// Verification of the sufficient small-period / high-gain conditions under
// which the observer-based predictor feedback is provably stabilizing, plus
// the constant machinery those conditions are built from: Lyapunov solves,
// Hurwitz tests, randomized decay certification, and the stability-envelope
// constants (omega, beta, Gamma, the per-window envelope M).

namespace predfb {

// All eigenvalue real parts < 0, decided by the characteristic polynomial
// and the Routh-Hurwitz table (n <= 4).
bool is_hurwitz(const Mat& m);

// Q > 0 with Q(A + pc') + (A + pc')'Q = -2 q' I for q' slightly above q, so
// the non-strict inequality with 2qI holds with margin. A is the shift chain
// of the strict-feedback form, c = e_1. Throws if A + pc' is not Hurwitz.
Mat solve_observer_lyapunov(const Mat& a, const Vec& p, const Vec& c, double q);

// Quadratic decay certificate for the delay-free feedback u = k'x:
//   x'P((A + bk')x + f(x) + diag(g(x,u)) d) <= -2 mu x'Px + gamma |d|^2.
struct ProbeReport {
  bool pass = true;
  double worst_margin = 0.0;  // min over probes of (rhs - lhs)/(|x|^2 + |d|^2)
  Vec worst_x, worst_d;
  double worst_u = 0.0;
};

// Randomized falsification check of the decay certificate: probes x and d in
// balls across 6 decades of radius (plus a deterministic direction grid) and
// evaluates the inequality as written. Pass means no probe violated it.
ProbeReport certify_decay(const Mat& P, const Vec& k, double mu, double gamma,
                          const StrictFeedbackPlant& plant, int probes, std::uint64_t seed);

struct DecayCertificate {
  Mat P;
  double mu = 0.0;
  double gamma = 0.0;
  bool found = false;
  double worst_margin = 0.0;
};

// Feasibility search for (P, mu, gamma) given k: sweeps Lyapunov solutions
// of the sector-shifted closed-loop matrix A + bk' + kappa L e1 e1' over a
// small (kappa, diagonal-weight) grid, measures the achievable decay rate on
// probe rays, backs off for the disturbance term, and keeps the candidate
// certify_decay likes best.
DecayCertificate find_decay_certificate(const Vec& k, const StrictFeedbackPlant& plant,
                                        int probes, std::uint64_t seed);

// Everything the feasibility report consumes. K is the measured predictor
// constant (calibrate_K); a, K1, K2 are the extreme Rayleigh quotients of Q
// and P, recomputed from the matrices by the checker.
struct GainCertificate {
  Mat P, Q;
  Vec k, p;
  double mu = 0.0, gamma = 0.0, q = 0.0;
  double theta = 1.0;
  double T1 = 0.0, T2 = 0.0;
  int l = 1, m = 1;
  double K = 0.0;
};

struct ConditionReport {
  double lhs = 0.0, rhs = 0.0;
  double margin = 0.0;  // rhs - lhs for '<' conditions; lhs - rhs for '>='
  bool holds = false;
};

struct FeasibilityReport {
  ConditionReport sampling_rate;  // 4|Qp|(L+theta) T1 sqrt(|Q|/a) < q
  ConditionReport gain_floor;     // theta >= max(1, 2|Q| L sqrt(n) / q)
  ConditionReport holding_rate;   // ((nL+1+|k|) sqrt(b'Pb/2K1) + mu)|k|(T2 + C) < mu
  double a = 0.0, K1 = 0.0, K2 = 0.0;
  double omega = 0.0;        // observer energy growth rate
  double beta = 0.0;         // omega + ((n+1)L+3)/2
  double rho = 0.0;          // (nL+1)(r+tau)/m
  bool rho_contractive = false;
  double gamma_envelope = 0.0;  // Gamma = K rho^{l+1}/(1-rho) + e^{((n+1)L+3)(r+tau)/2};
                                // +inf when rho >= 1 (bound vacuous)
  double sigma_cap = 0.0;       // largest admissible decay rate, 0 if infeasible
  bool all_hold = false;
};

// Evaluates the three sufficient conditions exactly as stated and the
// derived constants. Never throws on infeasible inputs: margins go negative
// and rho_contractive flags a vacuous predictor bound instead.
FeasibilityReport check_feasibility(const GainCertificate& cert, const StrictFeedbackPlant& plant);

// Smallest integer k >= 0 with t <= k.
double g_ceiling(double t);

// log of the per-window growth envelope
//   M(b) = (7(1+Gamma) e^{beta T2} / sqrt(1 - e^{-2 omega T1 e^{-b}}))^{g(j + tau/T2)}
// with j the first holding index with j T2 >= r + T1. Computed in log space
// (the power overflows doubles); +inf when rho >= 1.
double stability_envelope_log(const GainCertificate& cert, const StrictFeedbackPlant& plant,
                              double b_sup);

}  // namespace predfb
