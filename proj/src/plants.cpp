#include "predfb/plants.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace predfb {

double saturation(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("saturation: non-finite input");
  return x / std::max(1.0, std::fabs(x));
}

double StrictFeedbackPlant::f_eval(int i, std::span<const double> x) const {
  const auto& fi = f[static_cast<std::size_t>(i)];
  return fi ? fi(x.first(static_cast<std::size_t>(i + 1))) : 0.0;
}

double StrictFeedbackPlant::g_eval(int i, std::span<const double> x, double u) const {
  if (g.empty()) return 1.0;
  const auto& gi = g[static_cast<std::size_t>(i)];
  return gi ? gi(x, u) : 1.0;
}

void StrictFeedbackPlant::rhs(std::span<const double> x, double u_delayed,
                              std::span<const double> d, std::span<double> out) const {
  if (static_cast<int>(x.size()) != n || static_cast<int>(out.size()) != n)
    throw std::invalid_argument("strict-feedback rhs: dimension mismatch");
  if (!d.empty() && static_cast<int>(d.size()) != n)
    throw std::invalid_argument("strict-feedback rhs: disturbance dimension mismatch");
  for (int i = 0; i < n; ++i) {
    const double next = (i + 1 < n) ? x[static_cast<std::size_t>(i + 1)] : u_delayed;
    double di = d.empty() ? 0.0 : d[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] =
        f_eval(i, x) + next + (di != 0.0 ? g_eval(i, x, u_delayed) * di : 0.0);
  }
}

StrictFeedbackPlant benchmark_plant(double r, double tau) {
  StrictFeedbackPlant p;
  p.n = 2;
  p.f.resize(2);
  p.f[0] = [](std::span<const double> x) {
    const double v = x[0];
    return (v >= 0 ? 1.0 : -1.0) * v * v / std::sqrt(1.0 + v * v);
  };
  p.f[1] = nullptr;  // zero
  p.lipschitz = 4.0 * std::sqrt(2.0) / (3.0 * std::sqrt(3.0));
  p.disturbance_bound = 1.0;
  p.r = r;
  p.tau = tau;
  return p;
}

StrictFeedbackPlant linear_chain_plant(int n, double r, double tau) {
  if (n < 1) throw std::invalid_argument("linear chain: n must be >= 1");
  StrictFeedbackPlant p;
  p.n = n;
  p.f.assign(static_cast<std::size_t>(n), nullptr);
  p.lipschitz = 0.0;
  p.disturbance_bound = 1.0;
  p.r = r;
  p.tau = tau;
  return p;
}

void validate_plant(const StrictFeedbackPlant& plant, int probes, std::uint64_t seed) {
  if (plant.n < 1 || static_cast<int>(plant.f.size()) != plant.n)
    throw std::invalid_argument("plant: bad dimensions");
  if (!(plant.lipschitz >= 0.0) || !(plant.disturbance_bound >= 0.0))
    throw std::invalid_argument("plant: negative constants");
  if (!(plant.r >= 0.0) || !(plant.tau >= 0.0)) throw std::invalid_argument("plant: negative delay");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(0.0, 3.0);
  Vec zero(static_cast<std::size_t>(plant.n), 0.0);
  for (int i = 0; i < plant.n; ++i)
    if (std::fabs(plant.f_eval(i, zero)) > 1e-12)
      throw std::invalid_argument("plant: f_i(0) != 0");
  Vec a(static_cast<std::size_t>(plant.n)), b(static_cast<std::size_t>(plant.n));
  for (int k = 0; k < probes; ++k) {
    const double s = std::exp(scale_dist(rng));  // probe radii from ~1 to ~20
    double diff2 = 0.0;
    for (int i = 0; i < plant.n; ++i) {
      a[static_cast<std::size_t>(i)] = s * unit(rng);
      b[static_cast<std::size_t>(i)] = s * unit(rng);
      const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
      diff2 += d * d;
    }
    const double dist = std::sqrt(diff2);
    const double u = s * unit(rng);
    for (int i = 0; i < plant.n; ++i) {
      const double df = plant.f_eval(i, a) - plant.f_eval(i, b);
      if (std::fabs(df) > plant.lipschitz * dist + 1e-9)
        throw std::invalid_argument("plant: Lipschitz constant violated");
      if (std::fabs(plant.g_eval(i, a, u)) > plant.disturbance_bound + 1e-9)
        throw std::invalid_argument("plant: disturbance gain bound violated");
    }
  }
}

double growth_envelope(const StrictFeedbackPlant& plant, double x0_norm, double d_sup,
                       double u_sup, double t) {
  if (x0_norm < 0 || d_sup < 0 || u_sup < 0 || t < 0)
    throw std::invalid_argument("growth_envelope: negative argument");
  const double c = (plant.n + 1) * plant.lipschitz + 3.0;
  return (x0_norm + (plant.disturbance_bound * d_sup + u_sup) / std::sqrt(c)) *
         std::exp(c * t / 2.0);
}

void FeedforwardPlant::validate() const {
  if (!(T > 0.0)) throw std::invalid_argument("feedforward plant: T must be positive");
  if (!(r >= 0.0) || !(tau >= 0.0)) throw std::invalid_argument("feedforward plant: negative delay");
  const double delta = r + tau;
  if (!(delta > 0.0 && delta < T))
    throw std::invalid_argument("feedforward plant: r + tau must lie in (0, T)");
  if (output_case == OutputCase::OneOutput && !(eps > 0.0 && eps < 1.0 / 6.0))
    throw std::invalid_argument("feedforward plant: one-output case needs eps in (0, 1/6)");
}

void feedforward_rhs(std::span<const double> x, double u_delayed, std::span<double> out) {
  if (x.size() != 3 || out.size() != 3)
    throw std::invalid_argument("feedforward rhs: dimension mismatch");
  out[0] = u_delayed;
  out[1] = x[0] + x[0] * u_delayed;
  out[2] = x[1] + x[0] * x[0];
}

void LtiPlant::rhs(std::span<const double> x, double u_delayed, std::span<const double> d,
                   std::span<double> out) const {
  const int n = A.rows();
  if (static_cast<int>(x.size()) != n || static_cast<int>(out.size()) != n)
    throw std::invalid_argument("lti rhs: dimension mismatch");
  for (int i = 0; i < n; ++i) {
    double s = B[static_cast<std::size_t>(i)] * u_delayed;
    for (int j = 0; j < n; ++j) s += A(i, j) * x[static_cast<std::size_t>(j)];
    if (!d.empty() && !G.empty()) {
      if (static_cast<int>(d.size()) != G.cols())
        throw std::invalid_argument("lti rhs: disturbance dimension mismatch");
      for (int j = 0; j < G.cols(); ++j) s += G(i, j) * d[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = s;
  }
}

}  // namespace predfb
