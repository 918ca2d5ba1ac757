#pragma once

#include <cstdint>

#include "predfb/plants.hpp"
#include "predfb/signals.hpp"

// Approximate predictor for globally Lipschitz strict-feedback plants:
// the combined-delay window r + tau is split into m subintervals, and on
// each one a truncated Picard iteration (l steps from the constant initial
// guess) approximates the exact flow. The composition over all m
// subintervals predicts the state r + tau ahead of the newest estimate
// using only the stored input history. Accuracy per subinterval is
// geometric in the contraction factor rho = (n L + 1) T_sub whenever
// rho < 1; configurations with rho >= 1 still run (the predictor map is
// well defined) but carry no a-priori accuracy bound.

namespace predfb {

// Uniform-grid vector function on [0, length]; node k holds dim values.
struct GridFunction {
  int dim = 0;
  double length = 0.0;
  std::vector<double> v;  // (nodes) x dim, node-major

  int nodes() const { return dim > 0 ? static_cast<int>(v.size()) / dim : 0; }
  std::span<const double> node(int k) const {
    return {v.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  std::span<double> node(int k) {
    return {v.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  static GridFunction constant(std::span<const double> x, double length, int nodes);
};

struct PredictorConfig {
  int l = 1;             // Picard iterations per subinterval
  int m = 1;             // subinterval count over the window r + tau
  int quad_nodes = 4096; // grid intervals per subinterval (trapezoid rule)

  double subinterval(double window) const { return window / m; }
  double contraction(const StrictFeedbackPlant& plant) const {
    return (plant.n * plant.lipschitz + 1.0) * subinterval(plant.r + plant.tau);
  }
  void validate() const;
};

// One Picard sweep: out(t_k) = x(0) + int_0^{t_k} (f(x) + A x) dtau
// (composite trapezoid on the grid) + b * int_0^{t_k} u (exact, segment by
// segment). u's domain must cover [0, x.length).
GridFunction picard_step(const GridFunction& x, const PiecewiseConstantSignal& u,
                         const StrictFeedbackPlant& plant);

// l-fold Picard approximation of the flow at u.domain_end() starting from
// the constant embedding of x0. u's domain must start at 0.
Vec q_operator(const Vec& x0, const PiecewiseConstantSignal& u, int l, int quad_nodes,
               const StrictFeedbackPlant& plant);

// Composition over the m subwindows of u_window (domain [0, r + tau)).
Vec predict_lm(const Vec& x, const PiecewiseConstantSignal& u_window, const PredictorConfig& cfg,
               const StrictFeedbackPlant& plant);

// Runner-facing adapter: predicts from the state estimate z and the input
// history window of length r + tau anchored at the current time.
Vec phi_lm(const Vec& z, const HistoryWindow& u_window, const PredictorConfig& cfg,
           const StrictFeedbackPlant& plant);

// A-priori accuracy bound K rho^{l+1} / (1 - rho) * (|x| + sup|u|) for the
// full window; throws std::domain_error when rho >= 1 (no valid bound).
double error_bound(const PredictorConfig& cfg, const StrictFeedbackPlant& plant, double K,
                   double x_norm, double u_sup);

// Empirical constant: max over random (x, u) probes of
// |predict - reference flow| (1 - rho) / (rho^{l+1} (|x| + sup|u|)).
// Probes are drawn from a seeded stream, so a longer run extends a shorter
// one. Throws std::domain_error when rho >= 1.
double calibrate_K(const PredictorConfig& cfg, const StrictFeedbackPlant& plant, int samples,
                   std::uint64_t seed);

// Library-grade reference flow of the delay-free plant (fine fixed-step
// integration split at input breakpoints); used by calibrate_K.
Vec reference_flow(const StrictFeedbackPlant& plant, const Vec& x0,
                   const PiecewiseConstantSignal& u, double t);

}  // namespace predfb
