#pragma once

// Reference integration for the tests: classical RK4 written independently of
// the library's engine, with a step-doubling self-check so an oracle value is
// never trusted blindly. Piecewise-constant inputs are integrated segment by
// segment, so the only error source is the smooth flow itself.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "predfb/linalg.hpp"
#include "predfb/signals.hpp"

namespace oracle {

using predfb::Vec;
using Rhs = std::function<Vec(double, const Vec&)>;

inline Vec rk4(const Rhs& f, Vec y, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const Vec k1 = f(t, y);
    Vec s(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) s[j] = y[j] + 0.5 * h * k1[j];
    const Vec k2 = f(t + 0.5 * h, s);
    for (std::size_t j = 0; j < y.size(); ++j) s[j] = y[j] + 0.5 * h * k2[j];
    const Vec k3 = f(t + 0.5 * h, s);
    for (std::size_t j = 0; j < y.size(); ++j) s[j] = y[j] + h * k3[j];
    const Vec k4 = f(t + h, s);
    for (std::size_t j = 0; j < y.size(); ++j) {
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
  }
  return y;
}

// Integrates and requires the halved-step result to agree to `tol` (relative
// to 1 + |y|); throws std::runtime_error otherwise.
inline Vec integrate(const Rhs& f, const Vec& y0, double t0, double t1, int steps = 2048,
                     double tol = 1e-12) {
  const Vec coarse = rk4(f, y0, t0, t1, steps);
  const Vec fine = rk4(f, y0, t0, t1, 2 * steps);
  double diff = 0.0, scale = 1.0;
  for (std::size_t j = 0; j < fine.size(); ++j) {
    diff = std::max(diff, std::fabs(coarse[j] - fine[j]));
    scale = std::max(scale, std::fabs(fine[j]));
  }
  if (diff > tol * scale) throw std::runtime_error("oracle integration did not converge");
  return fine;
}

// Flow of x' = f(x, u(t)) under a piecewise-constant input, advancing exactly
// one input segment at a time.
inline Vec flow_zoh(const std::function<Vec(const Vec&, double)>& f,
                    const predfb::PiecewiseConstantSignal& u, const Vec& y0, double t0,
                    double t1, int steps_per_seg = 512, double tol = 1e-12) {
  if (t0 < u.domain_start() - 1e-12 || t1 > u.domain_end() + 1e-12) {
    throw std::runtime_error("oracle window outside the input domain");
  }
  Vec y = y0;
  double t = t0;
  const auto& bps = u.breakpoints();
  for (std::size_t j = 0; j + 1 < bps.size() && t < t1 - 1e-15; ++j) {
    const double a = std::max(t, bps[j]);
    const double b = std::min(t1, bps[j + 1]);
    if (b <= a + 1e-15) continue;
    const double uv = u.values()[j];
    y = integrate([&](double, const Vec& x) { return f(x, uv); }, y, a, b, steps_per_seg, tol);
    t = b;
  }
  if (t < t1 - 1e-12) throw std::runtime_error("oracle did not reach t1");
  return y;
}

}  // namespace oracle
