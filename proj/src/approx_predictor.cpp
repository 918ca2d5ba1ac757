#include "predfb/approx_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "predfb/linalg.hpp"

namespace predfb {

namespace {

// Compensated accumulator; the cumulative trapezoid sums thousands of nearly
// equal terms per sweep and plain summation would eat into the 1e-12 range.
struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Input-free drift f_i(x) + x_{i+1} (last row: f_n only; the input channel
// is integrated exactly elsewhere).
void drift(const StrictFeedbackPlant& plant, std::span<const double> x, std::span<double> out) {
  for (int i = 0; i < plant.n; ++i) {
    out[i] = plant.f_eval(i, x);
    if (i + 1 < plant.n) out[i] += x[i + 1];
  }
}

}  // namespace

GridFunction GridFunction::constant(std::span<const double> x, double length, int nodes) {
  if (nodes < 2) throw std::invalid_argument("grid function needs at least two nodes");
  if (!(length > 0.0)) throw std::invalid_argument("grid function needs a positive length");
  GridFunction g;
  g.dim = static_cast<int>(x.size());
  g.length = length;
  g.v.resize(static_cast<std::size_t>(nodes) * x.size());
  for (int k = 0; k < nodes; ++k) {
    std::copy(x.begin(), x.end(), g.node(k).begin());
  }
  return g;
}

void PredictorConfig::validate() const {
  if (l < 1) throw std::invalid_argument("predictor needs at least one iteration sweep (l >= 1)");
  if (m < 1) throw std::invalid_argument("predictor needs at least one subinterval (m >= 1)");
  if (quad_nodes < 1) throw std::invalid_argument("predictor needs at least one grid interval");
}

GridFunction picard_step(const GridFunction& x, const PiecewiseConstantSignal& u,
                         const StrictFeedbackPlant& plant) {
  if (x.dim != plant.n) throw std::invalid_argument("grid function dimension does not match plant");
  const int nodes = x.nodes();
  if (nodes < 2) throw std::invalid_argument("grid function needs at least two nodes");
  if (u.domain_start() > 0.0 || u.domain_end() < x.length) {
    throw std::invalid_argument("input signal must cover the grid interval");
  }

  const double h = x.length / (nodes - 1);
  GridFunction out;
  out.dim = x.dim;
  out.length = x.length;
  out.v.resize(x.v.size());
  std::copy(x.node(0).begin(), x.node(0).end(), out.node(0).begin());

  std::vector<double> g_prev(plant.n), g_cur(plant.n);
  drift(plant, x.node(0), g_prev);
  std::vector<Kahan> acc(plant.n);
  Kahan input_acc;
  double t_prev = 0.0;
  for (int k = 1; k < nodes; ++k) {
    const double t_k = (k == nodes - 1) ? x.length : k * h;
    drift(plant, x.node(k), g_cur);
    const double step = t_k - t_prev;
    for (int i = 0; i < plant.n; ++i) acc[i].add(0.5 * step * (g_prev[i] + g_cur[i]));
    input_acc.add(u.integral(t_prev, t_k));
    auto dst = out.node(k);
    const auto x0 = out.node(0);
    for (int i = 0; i < plant.n; ++i) dst[i] = x0[i] + acc[i].sum;
    dst[plant.n - 1] += input_acc.sum;
    g_prev.swap(g_cur);
    t_prev = t_k;
  }
  return out;
}

Vec q_operator(const Vec& x0, const PiecewiseConstantSignal& u, int l, int quad_nodes,
               const StrictFeedbackPlant& plant) {
  if (l < 1) throw std::invalid_argument("predictor needs at least one iteration sweep (l >= 1)");
  if (quad_nodes < 1) throw std::invalid_argument("predictor needs at least one grid interval");
  if (static_cast<int>(x0.size()) != plant.n) {
    throw std::invalid_argument("state dimension does not match plant");
  }
  const double t_sub = u.domain_end();
  if (u.domain_start() > 0.0 || !(t_sub > 0.0)) {
    throw std::invalid_argument("input signal must cover an interval [0, t_sub)");
  }
  GridFunction iterate = GridFunction::constant(x0, t_sub, quad_nodes + 1);
  for (int sweep = 0; sweep < l; ++sweep) iterate = picard_step(iterate, u, plant);
  const auto last = iterate.node(iterate.nodes() - 1);
  Vec result(last.begin(), last.end());
  if (!all_finite(result)) throw std::runtime_error("predictor iterate diverged to non-finite values");
  return result;
}

Vec predict_lm(const Vec& x, const PiecewiseConstantSignal& u_window, const PredictorConfig& cfg,
               const StrictFeedbackPlant& plant) {
  cfg.validate();
  if (static_cast<int>(x.size()) != plant.n) {
    throw std::invalid_argument("state dimension does not match plant");
  }
  const double window = plant.r + plant.tau;
  if (!(window > 0.0)) throw std::invalid_argument("plant must have a positive combined delay");
  const double have = u_window.domain_end() - u_window.domain_start();
  if (std::abs(have - window) > 1e-9 * std::max(1.0, window)) {
    throw std::invalid_argument("input window length must equal the combined delay");
  }

  const double s0 = u_window.domain_start();
  const double t_sub = have / cfg.m;
  Vec state = x;
  for (int j = 0; j < cfg.m; ++j) {
    const double a = (j == 0) ? s0 : s0 + j * t_sub;
    const double b = (j == cfg.m - 1) ? u_window.domain_end() : s0 + (j + 1) * t_sub;
    // Translating by -a pins the slice's start at exactly 0.
    const PiecewiseConstantSignal slice = u_window.restricted(a, b).translated(-a);
    state = q_operator(state, slice, cfg.l, cfg.quad_nodes, plant);
  }
  return state;
}

Vec phi_lm(const Vec& z, const HistoryWindow& u_window, const PredictorConfig& cfg,
           const StrictFeedbackPlant& plant) {
  if (u_window.signal == nullptr) throw std::invalid_argument("history window has no signal");
  const PiecewiseConstantSignal slice =
      u_window.signal->restricted(u_window.anchor - u_window.length, u_window.anchor);
  return predict_lm(z, slice, cfg, plant);
}

double error_bound(const PredictorConfig& cfg, const StrictFeedbackPlant& plant, double K,
                   double x_norm, double u_sup) {
  cfg.validate();
  if (!(K >= 0.0)) throw std::invalid_argument("error constant must be nonnegative");
  const double rho = cfg.contraction(plant);
  if (!(rho < 1.0)) {
    throw std::domain_error("accuracy bound is vacuous: contraction factor is not below 1");
  }
  return K * std::pow(rho, cfg.l + 1) / (1.0 - rho) * (x_norm + u_sup);
}

Vec reference_flow(const StrictFeedbackPlant& plant, const Vec& x0,
                   const PiecewiseConstantSignal& u, double t) {
  if (static_cast<int>(x0.size()) != plant.n) {
    throw std::invalid_argument("state dimension does not match plant");
  }
  const double s0 = u.domain_start();
  const double t_end = s0 + t;
  if (!(t >= 0.0) || t_end > u.domain_end() + 1e-12 * std::max(1.0, std::abs(u.domain_end()))) {
    throw std::invalid_argument("flow horizon exceeds the input domain");
  }
  if (t == 0.0) return x0;

  const double h_target = t / 4096.0;
  Vec x = x0;
  std::vector<double> k1(plant.n), k2(plant.n), k3(plant.n), k4(plant.n), tmp(plant.n);
  auto rk4_span = [&](double a, double b, double u_val) {
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / h_target)));
    const double h = (b - a) / steps;
    auto eval = [&](const std::vector<double>& s, std::vector<double>& out) {
      drift(plant, s, out);
      out[plant.n - 1] += u_val;
    };
    for (int sstep = 0; sstep < steps; ++sstep) {
      eval(x, k1);
      for (int i = 0; i < plant.n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      eval(tmp, k2);
      for (int i = 0; i < plant.n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      eval(tmp, k3);
      for (int i = 0; i < plant.n; ++i) tmp[i] = x[i] + h * k3[i];
      eval(tmp, k4);
      for (int i = 0; i < plant.n; ++i) {
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
  };

  const auto& bp = u.breakpoints();
  const auto& vals = u.values();
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double a = bp[j];
    const double b = std::min(bp[j + 1], t_end);
    if (a >= t_end) break;
    if (b > a) rk4_span(a, b, vals[j]);
  }
  if (!all_finite(x)) throw std::runtime_error("reference flow diverged to non-finite values");
  return x;
}

double calibrate_K(const PredictorConfig& cfg, const StrictFeedbackPlant& plant, int samples,
                   std::uint64_t seed) {
  cfg.validate();
  if (samples < 1) throw std::invalid_argument("calibration needs at least one sample");
  const double rho = cfg.contraction(plant);
  if (!(rho < 1.0)) {
    throw std::domain_error("calibration requires a contraction factor below 1");
  }
  const double window = plant.r + plant.tau;

  // Sequential draws from one seeded stream keep the estimate monotone in
  // the sample count: a longer run extends a shorter one probe for probe.
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_int_distribution<int> seg_count(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double k_hat = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec x0(plant.n);
    for (auto& xi : x0) xi = coord(eng);
    const int segs = seg_count(eng);
    std::vector<double> bp(static_cast<std::size_t>(segs) + 1);
    bp.front() = 0.0;
    bp.back() = window;
    for (int j = 1; j < segs; ++j) bp[j] = window * unit(eng);
    std::sort(bp.begin(), bp.end());
    bool degenerate = false;
    for (int j = 0; j < segs; ++j) {
      if (!(bp[j + 1] > bp[j])) degenerate = true;
    }
    std::vector<double> vals(segs);
    for (auto& v : vals) v = coord(eng);
    if (degenerate) continue;
    const PiecewiseConstantSignal u(bp, vals);

    const Vec predicted = predict_lm(x0, u, cfg, plant);
    const Vec truth = reference_flow(plant, x0, u, window);
    Vec diff(plant.n);
    for (int i = 0; i < plant.n; ++i) diff[i] = predicted[i] - truth[i];
    const double scale = norm2(x0) + u.sup_abs(0.0, window, false);
    if (scale < 1e-12) continue;
    const double ratio = norm2(diff) * (1.0 - rho) / (std::pow(rho, cfg.l + 1) * scale);
    k_hat = std::max(k_hat, ratio);
  }
  return k_hat;
}

}  // namespace predfb
