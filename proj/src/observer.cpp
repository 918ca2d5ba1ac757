#include "predfb/observer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace predfb {

void ObserverGains::validate(int n) const {
  if (!(theta >= 1.0)) throw std::invalid_argument("observer gain theta must be >= 1");
  if (static_cast<int>(p.size()) != n) {
    throw std::invalid_argument("injection vector length must match the plant order");
  }
  if (n < 2) throw std::invalid_argument("observer requires plant order >= 2");
}

ObserverGains benchmark_observer_gains() { return ObserverGains{1.0, {-3.0, -3.0}}; }

Vec observer_flow(const ObserverState& state, double u_delayed, const StrictFeedbackPlant& plant,
                  const ObserverGains& gains) {
  const int n = plant.n;
  gains.validate(n);
  if (static_cast<int>(state.z.size()) != n) {
    throw std::invalid_argument("estimate length must match the plant order");
  }

  const double innovation = state.z[0] - state.w;
  Vec out(static_cast<std::size_t>(n) + 1);
  double theta_pow = 1.0;
  for (int i = 0; i < n; ++i) {
    theta_pow *= gains.theta;
    out[i] = plant.f_eval(i, state.z) + theta_pow * gains.p[i] * innovation;
    out[i] += (i + 1 < n) ? state.z[i + 1] : u_delayed;
  }
  out[n] = plant.f_eval(0, state.z) + state.z[1];
  return out;
}

ObserverState observer_jump(const ObserverState& state, double y_sample) {
  return ObserverState{state.z, y_sample};
}

Vec lti_observer_flow(const Vec& z, double w, double u_delayed, const Mat& A, const Vec& B,
                      const Vec& c, const Vec& p) {
  const int n = static_cast<int>(z.size());
  if (A.rows() != n || A.cols() != n || static_cast<int>(B.size()) != n ||
      static_cast<int>(c.size()) != n || static_cast<int>(p.size()) != n) {
    throw std::invalid_argument("observer dimensions do not match");
  }
  const Vec Az = mul(A, z);
  const double innovation = dot(c, z) - w;
  Vec out(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i < n; ++i) out[i] = Az[i] + B[i] * u_delayed + p[i] * innovation;
  out[n] = dot(c, Az) + dot(c, B) * u_delayed;
  return out;
}

double observer_growth_rate(const StrictFeedbackPlant& plant, const ObserverGains& gains) {
  // Pure formula: usable for infeasible parameter points (theta < 1) that
  // the feasibility checker must still report on, so no gains.validate here.
  if (static_cast<int>(gains.p.size()) != plant.n || !(gains.theta > 0.0)) {
    throw std::invalid_argument("growth rate needs theta > 0 and a full injection vector");
  }
  const double L = plant.lipschitz;
  const int n = plant.n;
  double injection = 0.0;
  double theta_sq_pow = 1.0;
  for (int i = 0; i < n; ++i) {
    theta_sq_pow *= gains.theta * gains.theta;
    injection = std::max(injection, theta_sq_pow * gains.p[i] * gains.p[i]);
  }
  return 0.5 * std::max(L * (n + 1) + 2.0 + 2.0 * n * injection, 1.0 + L * L);
}

BoundCheck energy_bound_check(const SimulationLog& log, const StrictFeedbackPlant& plant,
                              const ObserverGains& gains) {
  const double omega = observer_growth_rate(plant, gains);
  const double r = log.r, tau = log.tau;

  BoundCheck check;
  check.worst_margin = std::numeric_limits<double>::infinity();

  double x_sup = log.x0_sup;  // sup |x| over [-r, t - r]
  double xi_sup = 0.0;        // sup |xi| over [0, t]
  double b_sup = 0.0;         // sup b over samples in [0, t]
  std::size_t x_row = 0, sample = 0;
  const double z0_energy = dot(log.z0, log.z0) + log.w0 * log.w0;

  for (const LogRow& row : log.rows) {
    const double t = row.t;
    while (x_row < log.rows.size() && log.rows[x_row].t <= t - r + 1e-12) {
      x_sup = std::max(x_sup, norm2(log.rows[x_row].x));
      ++x_row;
    }
    xi_sup = std::max(xi_sup, std::abs(row.xi));
    while (sample < log.sample_times.size() && log.sample_times[sample] <= t + 1e-12) {
      b_sup = std::max(b_sup, log.sample_perturbations[sample]);
      ++sample;
    }
    double u_sup = 0.0;
    const double u_hi = std::min(t - r - tau, log.input.domain_end());
    const double u_lo = std::max(-r - tau, log.input.domain_start());
    if (u_hi > u_lo) u_sup = log.input.sup_abs(u_lo, u_hi, false);

    const double lhs = dot(row.z, row.z) + row.w * row.w;
    if (lhs == 0.0) continue;  // bound trivially holds; margin is infinite

    const double denom = -std::expm1(-2.0 * omega * log.T1 * std::exp(-b_sup));
    const double drive = x_sup + xi_sup;
    double inner = z0_energy + u_sup * u_sup / (2.0 * omega);
    if (drive > 0.0) inner += drive * drive / denom;
    const double margin = 2.0 * omega * t + std::log(inner) - std::log(lhs);
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      check.worst_time = t;
    }
    if (margin < -1e-9) check.holds = false;
  }
  return check;
}

}  // namespace predfb
