#include "predfb/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>

#include "predfb/gains.hpp"

namespace predfb {
namespace {

constexpr double kEventTol = 1e-10;

// ---------------------------------------------------------------------------
// Exogenous scalar signals. Smooth kinds are evaluated pointwise; UniformSteps
// is materialized as a step function whose breakpoints sit exactly on sampling
// events, so inside any integration block it is constant and must be read at
// the block midpoint (never at a boundary, where rounding could land the read
// on the wrong side of a breakpoint).
// ---------------------------------------------------------------------------

struct ExoScalar {
  SignalSpec::Kind kind = SignalSpec::Kind::Zero;
  double amp = 0.0, freq = 0.0, phase = 0.0;
  PiecewiseConstantSignal steps = PiecewiseConstantSignal::empty(0.0);

  double at(double t) const {
    switch (kind) {
      case SignalSpec::Kind::Zero:
        return 0.0;
      case SignalSpec::Kind::Constant:
        return amp;
      case SignalSpec::Kind::Sinusoid:
        return amp * std::sin(freq * t + phase);
      case SignalSpec::Kind::UniformSteps: {
        if (steps.segment_count() == 0) return 0.0;
        const double hi = std::nextafter(steps.domain_end(), steps.domain_start());
        return steps(std::clamp(t, steps.domain_start(), hi));
      }
    }
    return 0.0;
  }

  // Read for the right-hand side on the block (t is a stage time, mid the
  // block midpoint).
  double at(double t, double block_mid) const {
    return kind == SignalSpec::Kind::UniformSteps ? at(block_mid) : at(t);
  }
};

ExoScalar make_exo(const SignalSpec& spec, const std::vector<double>& breaks, double pad_end) {
  ExoScalar e;
  e.kind = spec.kind;
  e.amp = spec.amplitude;
  e.freq = spec.frequency;
  e.phase = spec.phase;
  if (spec.kind == SignalSpec::Kind::UniformSteps && !breaks.empty()) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> draw(-std::abs(spec.amplitude),
                                                std::abs(spec.amplitude));
    std::vector<double> bps = breaks;
    bps.push_back(std::max(pad_end, breaks.back()) + 1.0);
    std::vector<double> vals(bps.size() - 1);
    for (double& v : vals) v = draw(rng);
    e.steps = PiecewiseConstantSignal(std::move(bps), std::move(vals));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Dense trajectory: cubic Hermite over the RK4 substeps (endpoint values and
// derivatives are O(h^4)-accurate, so the interpolant keeps that order).
// ---------------------------------------------------------------------------

struct DensePath {
  struct Seg {
    double t0 = 0.0, t1 = 0.0;
    Vec y0, f0, y1, f1;
  };
  std::vector<Seg> segs;

  Vec eval(double t) const {
    if (segs.empty()) throw std::domain_error("dense path is empty");
    if (t < segs.front().t0 - 1e-9 || t > segs.back().t1 + 1e-9) {
      throw std::domain_error("dense path evaluated outside its span");
    }
    t = std::clamp(t, segs.front().t0, segs.back().t1);
    auto it = std::upper_bound(segs.begin(), segs.end(), t,
                               [](double v, const Seg& s) { return v < s.t0; });
    const Seg& s = (it == segs.begin()) ? *it : *(it - 1);
    const double dt = s.t1 - s.t0;
    const double x = std::clamp((t - s.t0) / dt, 0.0, 1.0);
    const double x2 = x * x, x3 = x2 * x;
    const double h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
    const double h10 = x3 - 2.0 * x2 + x;
    const double h01 = -2.0 * x3 + 3.0 * x2;
    const double h11 = x3 - x2;
    Vec out(s.y0.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = h00 * s.y0[i] + h10 * dt * s.f0[i] + h01 * s.y1[i] + h11 * dt * s.f1[i];
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Event stream. Sampling and holding instants, plus flagless breakpoints of
// the delayed input (hold + tau, hold + r + tau). Instants closer than
// kEventTol are one event; the representative time of a merged cluster is the
// hold member's time when present, because input-segment breakpoints must
// coincide bit-exactly with hold instants.
// ---------------------------------------------------------------------------

struct Event {
  double t = 0.0;
  bool sample = false;
  bool hold = false;
};

std::vector<Event> build_events(const std::vector<double>& samples,
                                const std::vector<double>& holds,
                                const std::vector<double>& breaks, double horizon) {
  struct Tagged {
    double t;
    bool sample, hold;
  };
  std::vector<Tagged> pts;
  for (double t : samples) {
    if (t <= horizon + kEventTol) pts.push_back({t, true, false});
  }
  for (double t : holds) {
    if (t <= horizon + kEventTol) pts.push_back({t, false, true});
  }
  pts.push_back({0.0, false, false});
  pts.push_back({horizon, false, false});
  std::stable_sort(pts.begin(), pts.end(),
                   [](const Tagged& a, const Tagged& b) { return a.t < b.t; });

  std::vector<Event> evs;
  std::size_t i = 0;
  while (i < pts.size()) {
    std::size_t j = i;
    Event ev{pts[i].t, false, false};
    while (j < pts.size() && pts[j].t - pts[i].t <= kEventTol) {
      ev.sample = ev.sample || pts[j].sample;
      if (pts[j].hold && !ev.hold) ev.t = pts[j].t;
      ev.hold = ev.hold || pts[j].hold;
      ++j;
    }
    evs.push_back(ev);
    i = j;
  }

  for (double t : breaks) {
    if (t < -kEventTol || t > horizon + kEventTol) continue;
    auto it = std::lower_bound(evs.begin(), evs.end(), t,
                               [](const Event& e, double v) { return e.t < v; });
    const bool near_next = it != evs.end() && std::abs(it->t - t) <= kEventTol;
    const bool near_prev = it != evs.begin() && std::abs((it - 1)->t - t) <= kEventTol;
    if (!near_next && !near_prev) evs.insert(it, Event{t, false, false});
  }
  return evs;
}

// ---------------------------------------------------------------------------
// Fixed-step classical RK4 over one inter-event block [t0, t1]. The final
// derivative of each substep doubles as the first stage of the next and as
// the Hermite endpoint slope. Interior nodes are reported through emit_row;
// the block endpoints are logged by the caller around the event jumps.
// ---------------------------------------------------------------------------

using RhsFn = std::function<void(double t, double mid, const Vec& y, Vec& out)>;
using RowFn = std::function<void(double t, const Vec& y, bool sample, bool hold)>;

void rk4_block(const RhsFn& rhs, double t0, double t1, double h_target, Vec& y, DensePath& path,
               const RowFn& emit_row) {
  const double len = t1 - t0;
  const int steps = std::max(1, static_cast<int>(std::ceil(len / h_target - 1e-9)));
  const double h = len / steps;
  const double mid = t0 + 0.5 * len;
  const std::size_t dim = y.size();

  Vec f0(dim), k2(dim), k3(dim), k4(dim), f1(dim), stage(dim), ynext(dim);
  rhs(t0, mid, y, f0);
  double tc = t0;
  for (int i = 0; i < steps; ++i) {
    const double tn = (i + 1 == steps) ? t1 : t0 + (i + 1) * h;
    const double hi = tn - tc;
    for (std::size_t j = 0; j < dim; ++j) stage[j] = y[j] + 0.5 * hi * f0[j];
    rhs(tc + 0.5 * hi, mid, stage, k2);
    for (std::size_t j = 0; j < dim; ++j) stage[j] = y[j] + 0.5 * hi * k2[j];
    rhs(tc + 0.5 * hi, mid, stage, k3);
    for (std::size_t j = 0; j < dim; ++j) stage[j] = y[j] + hi * k3[j];
    rhs(tn, mid, stage, k4);
    for (std::size_t j = 0; j < dim; ++j) {
      ynext[j] = y[j] + hi / 6.0 * (f0[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    if (!all_finite(ynext)) {
      throw std::runtime_error("closed-loop state is not finite near t = " + std::to_string(tn));
    }
    rhs(tn, mid, ynext, f1);
    path.segs.push_back({tc, tn, y, f0, ynext, f1});
    if (i + 1 < steps) emit_row(tn, ynext, false, false);
    y = ynext;
    f0 = f1;
    tc = tn;
  }
}

// Shared closed-loop skeleton: walk the event list, integrate between events,
// apply sample jumps before hold updates, append each new input segment so
// its breakpoints land exactly on hold instants, and log one row per node.
struct LoopHooks {
  RhsFn rhs;
  std::function<void(double t, Vec& y)> on_sample;
  std::function<double(double t, const Vec& y)> on_hold;
  std::function<void(double t, const Vec& y, LogRow& row)> fill;
};

void run_event_loop(const std::vector<Event>& events, const std::vector<double>& holds,
                    double horizon, double window, double h_target, Vec y,
                    PiecewiseConstantSignal& u_sig, const ExoScalar& d_exo,
                    const ExoScalar& xi_exo, int d_dim, const LoopHooks& hooks,
                    SimulationLog& log, DensePath& path) {
  std::size_t hold_idx = 0;
  auto emit_row = [&](double t, const Vec& state, bool sample, bool hold) {
    LogRow row;
    row.t = t;
    hooks.fill(t, state, row);
    row.u = u_sig(std::min(t, std::nextafter(u_sig.domain_end(), u_sig.domain_start())));
    row.d = Vec(static_cast<std::size_t>(d_dim), d_exo.at(t));
    row.xi = xi_exo.at(t);
    row.sample_event = sample;
    row.hold_event = hold;
    log.rows.push_back(std::move(row));
  };

  double t_prev = events.front().t;
  for (const Event& ev : events) {
    if (ev.t > t_prev + kEventTol) {
      rk4_block(hooks.rhs, t_prev, ev.t, h_target, y, path, emit_row);
    }
    if (ev.sample) hooks.on_sample(ev.t, y);
    if (ev.hold) {
      const double u_val = hooks.on_hold(ev.t, y);
      if (!std::isfinite(u_val)) {
        throw std::runtime_error("control value is not finite at t = " + std::to_string(ev.t));
      }
      ++hold_idx;
      const double next_hold =
          hold_idx < holds.size() ? holds[hold_idx] : horizon + window + 1.0;
      u_sig.append(u_val, next_hold - u_sig.domain_end());
    }
    emit_row(ev.t, y, ev.sample, ev.hold);
    t_prev = ev.t;
  }
}

std::vector<double> uniform_holds(double period, double horizon) {
  std::vector<double> holds;
  for (int j = 0;; ++j) {
    const double t = j * period;
    if (t > horizon + kEventTol) break;
    holds.push_back(t);
  }
  return holds;
}

std::vector<double> input_breaks(const std::vector<double>& holds, double tau, double r,
                                 double horizon) {
  std::vector<double> breaks;
  for (double t : holds) {
    if (t + tau <= horizon + kEventTol) breaks.push_back(t + tau);
    if (t + r + tau <= horizon + kEventTol) breaks.push_back(t + r + tau);
  }
  return breaks;
}

std::function<double(double)> perturbation_fn(const SignalSpec& spec,
                                              const std::shared_ptr<std::mt19937_64>& rng) {
  switch (spec.kind) {
    case SignalSpec::Kind::Zero:
      return [](double) { return 0.0; };
    case SignalSpec::Kind::Constant:
      return [a = spec.amplitude](double) { return a; };
    case SignalSpec::Kind::Sinusoid:
      return [s = spec](double t) { return s.amplitude * std::sin(s.frequency * t + s.phase); };
    case SignalSpec::Kind::UniformSteps:
      // One fresh draw per sampling instant, consumed in time order.
      return [rng, a = std::abs(spec.amplitude)](double) {
        std::uniform_real_distribution<double> draw(0.0, a);
        return draw(*rng);
      };
  }
  return [](double) { return 0.0; };
}

void seed_log_context(SimulationLog& log, const Scenario& sc, double r, double tau,
                      double sampling, double holding) {
  log.n = sc.state_dim();
  log.z0 = sc.z0.empty() ? Vec(static_cast<std::size_t>(sc.state_dim()), 0.0) : sc.z0;
  log.w0 = sc.w0;
  log.x0_sup = norm2(sc.x0);
  log.x_history = [x0 = sc.x0](double) { return x0; };
  log.T1 = sampling;
  log.T2 = holding;
  log.r = r;
  log.tau = tau;
}

// ---------------------------------------------------------------------------
// Family loops.
// ---------------------------------------------------------------------------

SimulationLog run_lipschitz(const Scenario& sc) {
  const StrictFeedbackPlant& plant = sc.plant;
  const int n = plant.n;
  const double r = plant.r, tau = plant.tau, window = r + tau;

  auto rng = std::make_shared<std::mt19937_64>(sc.perturbation.seed);
  SamplingSchedule schedule =
      generate_schedule(sc.T1, perturbation_fn(sc.perturbation, rng), sc.horizon);
  const std::vector<double> holds = uniform_holds(sc.T2, sc.horizon);
  const std::vector<Event> events =
      build_events(schedule.times, holds, input_breaks(holds, tau, r, sc.horizon), sc.horizon);

  std::vector<double> sample_reps;
  for (const Event& e : events) {
    if (e.sample) sample_reps.push_back(e.t);
  }
  const ExoScalar d_exo = make_exo(sc.disturbance, sample_reps, sc.horizon);
  const ExoScalar xi_exo = make_exo(sc.noise, sample_reps, sc.horizon);

  PiecewiseConstantSignal u_sig({-window, 0.0}, {sc.u0});
  SimulationLog log;
  seed_log_context(log, sc, r, tau, sc.T1, sc.T2);
  DensePath path;

  Vec y(static_cast<std::size_t>(2 * n + 1), 0.0);
  std::copy(sc.x0.begin(), sc.x0.end(), y.begin());
  std::copy(log.z0.begin(), log.z0.end(), y.begin() + n);
  y[static_cast<std::size_t>(2 * n)] = sc.w0;

  auto delayed_x = [&](double t) -> Vec {
    if (t <= 0.0) return sc.x0;
    Vec full = path.eval(t);
    return Vec(full.begin(), full.begin() + n);
  };

  std::size_t sample_idx = 0;
  LoopHooks hooks;
  hooks.rhs = [&](double t, double mid, const Vec& s, Vec& out) {
    out.assign(s.size(), 0.0);
    const double u_plant = u_sig(mid - tau);
    const double u_obs = u_sig(mid - window);
    const Vec d(static_cast<std::size_t>(n), d_exo.at(t, mid));
    plant.rhs(std::span<const double>(s.data(), n), u_plant,
              std::span<const double>(d.data(), d.size()), std::span<double>(out.data(), n));
    ObserverState st{Vec(s.begin() + n, s.begin() + 2 * n), s[static_cast<std::size_t>(2 * n)]};
    const Vec of = observer_flow(st, u_obs, plant, sc.observer);
    std::copy(of.begin(), of.begin() + n, out.begin() + n);
    out[static_cast<std::size_t>(2 * n)] = of[static_cast<std::size_t>(n)];
  };
  hooks.on_sample = [&](double t, Vec& s) {
    const Vec xr = delayed_x(t - r);
    s[static_cast<std::size_t>(2 * n)] = xr[0] + xi_exo.at(t);
    log.sample_times.push_back(t);
    log.sample_perturbations.push_back(sample_idx < schedule.perturbations.size()
                                           ? schedule.perturbations[sample_idx]
                                           : schedule.sup_perturbation());
    ++sample_idx;
  };
  hooks.on_hold = [&](double t, const Vec& s) {
    const Vec z(s.begin() + n, s.begin() + 2 * n);
    const Vec pred = phi_lm(z, HistoryWindow{&u_sig, t, window, true}, sc.predictor, plant);
    return dot(sc.k, pred);
  };
  hooks.fill = [&](double, const Vec& s, LogRow& row) {
    row.x = Vec(s.begin(), s.begin() + n);
    row.z = Vec(s.begin() + n, s.begin() + 2 * n);
    row.w = s[static_cast<std::size_t>(2 * n)];
  };

  const double h = sc.step > 0.0 ? sc.step : std::min(sc.T1, sc.T2) / 20.0;
  run_event_loop(events, holds, sc.horizon, window, h, std::move(y), u_sig, d_exo, xi_exo, n,
                 hooks, log, path);
  log.input = u_sig;
  return log;
}

SimulationLog run_lti(const Scenario& sc) {
  const LtiPlant& plant = sc.lti;
  const int n = plant.A.rows();
  const double r = plant.r, tau = plant.tau, window = r + tau;

  auto rng = std::make_shared<std::mt19937_64>(sc.perturbation.seed);
  SamplingSchedule schedule =
      generate_schedule(sc.T1, perturbation_fn(sc.perturbation, rng), sc.horizon);
  const std::vector<double> holds = uniform_holds(sc.T2, sc.horizon);
  const std::vector<Event> events =
      build_events(schedule.times, holds, input_breaks(holds, tau, r, sc.horizon), sc.horizon);

  std::vector<double> sample_reps;
  for (const Event& e : events) {
    if (e.sample) sample_reps.push_back(e.t);
  }
  const ExoScalar d_exo = make_exo(sc.disturbance, sample_reps, sc.horizon);
  const ExoScalar xi_exo = make_exo(sc.noise, sample_reps, sc.horizon);

  PiecewiseConstantSignal u_sig({-window, 0.0}, {sc.u0});
  SimulationLog log;
  seed_log_context(log, sc, r, tau, sc.T1, sc.T2);
  DensePath path;

  Vec y(static_cast<std::size_t>(2 * n + 1), 0.0);
  std::copy(sc.x0.begin(), sc.x0.end(), y.begin());
  std::copy(log.z0.begin(), log.z0.end(), y.begin() + n);
  y[static_cast<std::size_t>(2 * n)] = sc.w0;

  auto delayed_x = [&](double t) -> Vec {
    if (t <= 0.0) return sc.x0;
    Vec full = path.eval(t);
    return Vec(full.begin(), full.begin() + n);
  };

  const bool has_d = !plant.G.empty();
  std::size_t sample_idx = 0;
  LoopHooks hooks;
  hooks.rhs = [&](double t, double mid, const Vec& s, Vec& out) {
    out.assign(s.size(), 0.0);
    const double u_plant = u_sig(mid - tau);
    const double u_obs = u_sig(mid - window);
    const Vec d(static_cast<std::size_t>(has_d ? n : 0), d_exo.at(t, mid));
    plant.rhs(std::span<const double>(s.data(), n), u_plant,
              std::span<const double>(d.data(), d.size()), std::span<double>(out.data(), n));
    const Vec zz(s.begin() + n, s.begin() + 2 * n);
    const Vec of =
        lti_observer_flow(zz, s[static_cast<std::size_t>(2 * n)], u_obs, plant.A, plant.B,
                          plant.c, sc.lti_p);
    std::copy(of.begin(), of.begin() + n, out.begin() + n);
    out[static_cast<std::size_t>(2 * n)] = of[static_cast<std::size_t>(n)];
  };
  hooks.on_sample = [&](double t, Vec& s) {
    const Vec xr = delayed_x(t - r);
    s[static_cast<std::size_t>(2 * n)] = dot(plant.c, xr) + xi_exo.at(t);
    log.sample_times.push_back(t);
    log.sample_perturbations.push_back(sample_idx < schedule.perturbations.size()
                                           ? schedule.perturbations[sample_idx]
                                           : schedule.sup_perturbation());
    ++sample_idx;
  };
  hooks.on_hold = [&](double t, const Vec& s) {
    const Vec z(s.begin() + n, s.begin() + 2 * n);
    return lti_control(z, HistoryWindow{&u_sig, t, window, true}, sc.lti_k, plant.A, plant.B);
  };
  hooks.fill = [&](double, const Vec& s, LogRow& row) {
    row.x = Vec(s.begin(), s.begin() + n);
    row.z = Vec(s.begin() + n, s.begin() + 2 * n);
    row.w = s[static_cast<std::size_t>(2 * n)];
  };

  const double h = sc.step > 0.0 ? sc.step : std::min(sc.T1, sc.T2) / 20.0;
  run_event_loop(events, holds, sc.horizon, window, h, std::move(y), u_sig, d_exo, xi_exo, n,
                 hooks, log, path);
  log.input = u_sig;
  return log;
}

SimulationLog run_feedforward(const Scenario& sc) {
  const FeedforwardPlant& plant = sc.ff;
  const double T = plant.T, r = plant.r, tau = plant.tau, delta = r + tau;
  const int n = 3;
  const int warm = reconstruction_warmup(plant.output_case);
  const double eps_used = std::clamp(sc.ff_gains.bound(), 1e-9, 1.0 / 6.0 - 1e-9);

  const std::vector<double> holds = uniform_holds(T, sc.horizon);
  const std::vector<Event> events =
      build_events(holds, holds, input_breaks(holds, tau, 0.0, sc.horizon), sc.horizon);

  const ExoScalar d_exo;   // disturbance-free family
  const ExoScalar xi_exo;  // noise-free family

  PiecewiseConstantSignal u_sig({-warm * T, 0.0}, {sc.u0});
  SimulationLog log;
  seed_log_context(log, sc, r, tau, T, T);
  DensePath path;

  Vec y = sc.x0;
  auto delayed_x = [&](double t) -> Vec {
    if (t <= 0.0) return sc.x0;
    return path.eval(t);
  };

  std::vector<std::array<double, 2>> y_hist;
  std::vector<double> u_hist;
  Vec latest_recon(static_cast<std::size_t>(n), 0.0);
  double latest_meas = 0.0;

  LoopHooks hooks;
  hooks.rhs = [&](double, double mid, const Vec& s, Vec& out) {
    out.assign(s.size(), 0.0);
    feedforward_rhs(std::span<const double>(s.data(), s.size()), u_sig(mid - tau),
                    std::span<double>(out.data(), out.size()));
  };
  hooks.on_sample = [&](double t, Vec&) {
    const Vec xr = delayed_x(t - r);
    if (plant.output_case == OutputCase::TwoOutput) {
      y_hist.push_back({xr[0], xr[2]});
    } else {
      y_hist.push_back({xr[2], 0.0});
    }
    latest_meas = y_hist.back()[0];
    const int i = static_cast<int>(y_hist.size()) - 1;
    if (i >= warm) {
      std::array<double, 3> rec{};
      if (plant.output_case == OutputCase::TwoOutput) {
        rec = reconstruct_two_output({y_hist[i - 1][0], y_hist[i][0]},
                                     {y_hist[i - 1][1], y_hist[i][1]},
                                     {u_hist[i - 2], u_hist[i - 1]}, T, delta);
      } else {
        rec = reconstruct_one_output({y_hist[i - 2][0], y_hist[i - 1][0], y_hist[i][0]},
                                     {u_hist[i - 3], u_hist[i - 2], u_hist[i - 1]}, T, delta,
                                     eps_used);
      }
      latest_recon.assign(rec.begin(), rec.end());
    }
    log.sample_times.push_back(t);
    log.sample_perturbations.push_back(0.0);
  };
  hooks.on_hold = [&](double, const Vec&) {
    const double u = control_step(plant.output_case, y_hist, u_hist, T, delta, sc.ff_gains,
                                  sc.u0);
    u_hist.push_back(u);
    return u;
  };
  hooks.fill = [&](double, const Vec& s, LogRow& row) {
    row.x = s;
    row.z = latest_recon;
    row.w = latest_meas;
  };

  const double h = sc.step > 0.0 ? sc.step : T / 20.0;
  run_event_loop(events, holds, sc.horizon, delta, h, std::move(y), u_sig, d_exo, xi_exo, n,
                 hooks, log, path);
  log.input = u_sig;
  return log;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario plumbing.
// ---------------------------------------------------------------------------

int Scenario::state_dim() const {
  switch (family) {
    case Family::ExactFeedforward:
      return 3;
    case Family::ApproxLipschitz:
      return plant.n;
    case Family::LtiExact:
      return static_cast<int>(lti.A.rows());
  }
  return 0;
}

double Scenario::sampling_period() const {
  return family == Family::ExactFeedforward ? ff.T : T1;
}

double Scenario::holding_period() const {
  return family == Family::ExactFeedforward ? ff.T : T2;
}

void Scenario::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (step < 0.0 || !std::isfinite(step)) throw std::invalid_argument("step must be >= 0");
  const int n = state_dim();
  if (n <= 0) throw std::invalid_argument("plant dimension must be positive");
  if (static_cast<int>(x0.size()) != n) {
    throw std::invalid_argument("x0 must match the plant dimension");
  }
  if (!all_finite(x0) || !std::isfinite(u0) || !std::isfinite(w0) || !all_finite(z0)) {
    throw std::invalid_argument("initial data must be finite");
  }
  switch (family) {
    case Family::ExactFeedforward: {
      ff.validate();
      const auto zero = SignalSpec::Kind::Zero;
      if (disturbance.kind != zero || noise.kind != zero || perturbation.kind != zero) {
        throw std::invalid_argument(
            "the feedforward family is disturbance-free with uniform sampling; "
            "disturbance, noise and perturbation specs must be Zero");
      }
      if (ff.output_case == OutputCase::OneOutput &&
          (ff_gains.bound() > ff.eps + 1e-12 || std::abs(u0) > ff.eps + 1e-12)) {
        throw std::invalid_argument(
            "one-output reconstruction needs the feedback bound and the input "
            "history within the admissible input range");
      }
      break;
    }
    case Family::ApproxLipschitz: {
      validate_plant(plant, 0, 0);  // structural checks only below; cheap probe count
      if (static_cast<int>(k.size()) != n) {
        throw std::invalid_argument("feedback row k must match the plant dimension");
      }
      observer.validate(n);
      predictor.validate();
      if (static_cast<int>(z0.size()) != n && !z0.empty()) {
        throw std::invalid_argument("z0 must match the plant dimension");
      }
      if (!(T1 > 0.0) || !(T2 > 0.0)) throw std::invalid_argument("T1, T2 must be positive");
      if (!(plant.r + plant.tau > 0.0)) {
        throw std::invalid_argument("the prediction window r + tau must be positive");
      }
      break;
    }
    case Family::LtiExact: {
      const int rows = static_cast<int>(lti.A.rows());
      if (rows == 0 || lti.A.cols() != rows) throw std::invalid_argument("A must be square");
      if (static_cast<int>(lti.B.size()) != rows || static_cast<int>(lti.c.size()) != rows) {
        throw std::invalid_argument("B and c must match the plant dimension");
      }
      if (static_cast<int>(lti_k.size()) != rows || static_cast<int>(lti_p.size()) != rows) {
        throw std::invalid_argument("lti_k and lti_p must match the plant dimension");
      }
      if (!lti.G.empty() && (lti.G.rows() != rows || lti.G.cols() != rows)) {
        throw std::invalid_argument("G must be empty or n-by-n");
      }
      if (static_cast<int>(z0.size()) != rows && !z0.empty()) {
        throw std::invalid_argument("z0 must match the plant dimension");
      }
      if (!(T1 > 0.0) || !(T2 > 0.0)) throw std::invalid_argument("T1, T2 must be positive");
      if (lti.r < 0.0 || lti.tau < 0.0 || !(lti.r + lti.tau > 0.0)) {
        throw std::invalid_argument("delays must be nonnegative with r + tau > 0");
      }
      break;
    }
  }
}

Scenario benchmark_scenario() {
  Scenario sc;
  sc.name = "benchmark";
  sc.family = Family::ApproxLipschitz;
  sc.plant = benchmark_plant();
  sc.k = {-15.0, -9.0};
  sc.observer = benchmark_observer_gains();
  sc.predictor = PredictorConfig{};
  sc.T1 = 0.03;
  sc.T2 = 0.01;
  sc.x0 = {1.0, 1.0};
  sc.u0 = -2.0;
  sc.z0 = {0.0, 0.0};
  sc.w0 = 0.0;
  sc.horizon = 20.0;
  sc.seed = 1;
  return sc;
}

SimulationLog run_closed_loop(const Scenario& sc) {
  sc.validate();
  switch (sc.family) {
    case Family::ExactFeedforward:
      return run_feedforward(sc);
    case Family::ApproxLipschitz:
      return run_lipschitz(sc);
    case Family::LtiExact:
      return run_lti(sc);
  }
  throw std::invalid_argument("unknown scenario family");
}

// ---------------------------------------------------------------------------
// CSV and SVG emission.
// ---------------------------------------------------------------------------

namespace {

void append_g17(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::string csv_text(const SimulationLog& log) {
  const int n = log.n;
  std::string out;
  out.reserve(log.rows.size() * 64 + 64);
  out += "t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",z" + std::to_string(i);
  out += ",w,u";
  for (int i = 1; i <= n; ++i) out += ",d" + std::to_string(i);
  out += ",xi,event\n";
  for (const LogRow& row : log.rows) {
    append_g17(out, row.t);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_g17(out, i < static_cast<int>(row.x.size()) ? row.x[i] : 0.0);
    }
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_g17(out, i < static_cast<int>(row.z.size()) ? row.z[i] : 0.0);
    }
    out += ',';
    append_g17(out, row.w);
    out += ',';
    append_g17(out, row.u);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_g17(out, i < static_cast<int>(row.d.size()) ? row.d[i] : 0.0);
    }
    out += ',';
    append_g17(out, row.xi);
    out += ',';
    if (row.sample_event && row.hold_event) {
      out += "sample+hold";
    } else if (row.sample_event) {
      out += "sample";
    } else if (row.hold_event) {
      out += "hold";
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const SimulationLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << csv_text(log);
}

namespace {

std::function<double(const LogRow&)> column_extractor(const SimulationLog& log,
                                                      const std::string& name) {
  const int n = log.n;
  auto indexed = [&](char prefix, const std::string& s) -> int {
    if (s.size() < 2 || s[0] != prefix) return -1;
    int idx = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return -1;
      idx = idx * 10 + (s[i] - '0');
    }
    return (idx >= 1 && idx <= n) ? idx - 1 : -1;
  };
  if (name == "w") return [](const LogRow& r) { return r.w; };
  if (name == "u") return [](const LogRow& r) { return r.u; };
  if (name == "xi") return [](const LogRow& r) { return r.xi; };
  if (int i = indexed('x', name); i >= 0) {
    return [i](const LogRow& r) { return i < static_cast<int>(r.x.size()) ? r.x[i] : 0.0; };
  }
  if (int i = indexed('z', name); i >= 0) {
    return [i](const LogRow& r) { return i < static_cast<int>(r.z.size()) ? r.z[i] : 0.0; };
  }
  if (int i = indexed('d', name); i >= 0) {
    return [i](const LogRow& r) { return i < static_cast<int>(r.d.size()) ? r.d[i] : 0.0; };
  }
  throw std::invalid_argument("unknown plot column: " + name);
}

}  // namespace

void emit_plot(const SimulationLog& log, const std::string& path,
               const std::vector<std::string>& columns) {
  if (log.rows.empty()) throw std::invalid_argument("cannot plot an empty log");
  if (columns.empty()) throw std::invalid_argument("no plot columns given");

  std::vector<std::function<double(const LogRow&)>> ext;
  ext.reserve(columns.size());
  for (const auto& c : columns) ext.push_back(column_extractor(log, c));

  const double t0 = log.rows.front().t, t1 = log.rows.back().t;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const LogRow& row : log.rows) {
    for (const auto& e : ext) {
      const double v = e(row);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) {
    hi += 0.5;
    lo -= 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double width = 900, height = 560;
  const double ml = 70, mr = 160, mt = 30, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double t) { return ml + (t - t0) / (t1 - t0) * pw; };
  auto py = [&](double v) { return mt + (hi - v) / (hi - lo) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double tv = t0 + (t1 - t0) * i / 5.0;
    const double vv = lo + (hi - lo) * i / 5.0;
    char tb[32], vb[32];
    std::snprintf(tb, sizeof(tb), "%.3g", tv);
    std::snprintf(vb, sizeof(vb), "%.3g", vv);
    svg << "<line x1='" << px(tv) << "' y1='" << mt << "' x2='" << px(tv) << "' y2='"
        << (mt + ph) << "' stroke='#dddddd'/>\n"
        << "<text x='" << px(tv) << "' y='" << (mt + ph + 18)
        << "' font-size='12' text-anchor='middle'>" << tb << "</text>\n"
        << "<line x1='" << ml << "' y1='" << py(vv) << "' x2='" << (ml + pw) << "' y2='"
        << py(vv) << "' stroke='#dddddd'/>\n"
        << "<text x='" << (ml - 8) << "' y='" << (py(vv) + 4)
        << "' font-size='12' text-anchor='end'>" << vb << "</text>\n";
  }
  svg << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='black'/>\n";
  for (std::size_t s = 0; s < ext.size(); ++s) {
    svg << "<polyline fill='none' stroke='" << palette[s % 8] << "' stroke-width='1.4' points='";
    for (const LogRow& row : log.rows) {
      svg << px(row.t) << ',' << py(ext[s](row)) << ' ';
    }
    svg << "'/>\n";
    svg << "<text x='" << (ml + pw + 12) << "' y='" << (mt + 16 + 18 * s)
        << "' font-size='13' fill='" << palette[s % 8] << "'>" << columns[s] << "</text>\n";
  }
  svg << "<text x='" << (ml + pw / 2) << "' y='" << (height - 12)
      << "' font-size='13' text-anchor='middle'>t</text>\n"
      << "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << svg.str();
}

// ---------------------------------------------------------------------------
// Post-hoc log invariants.
// ---------------------------------------------------------------------------

LogValidation validate_log(const SimulationLog& log, const Scenario& sc, double calibrated_K) {
  if (sc.family != Family::ApproxLipschitz) {
    throw std::invalid_argument("validate_log expects the Lipschitz observer family");
  }
  LogValidation v;
  v.energy = energy_bound_check(log, sc.plant, sc.observer);

  const StrictFeedbackPlant& plant = sc.plant;
  const int n = plant.n;
  const double L = plant.lipschitz;
  const double window = plant.r + plant.tau;
  const double rho = sc.predictor.contraction(plant);
  if (!(rho < 1.0) || !(calibrated_K > 0.0)) return v;

  v.growth_checked = true;
  v.growth_margin = std::numeric_limits<double>::infinity();
  const double omega = observer_growth_rate(plant, sc.observer);
  const double beta = omega + ((n + 1) * L + 3.0) / 2.0;
  const double gamma_env = calibrated_K * std::pow(rho, sc.predictor.l + 1) / (1.0 - rho) +
                           std::exp(((n + 1) * L + 3.0) * window / 2.0);

  const double u0_sup =
      log.input.segment_count() > 0
          ? log.input.sup_abs(log.input.domain_start(),
                              std::min(0.0, log.input.domain_end()), false)
          : 0.0;
  const double init = norm2(log.z0) + std::abs(log.w0) + log.x0_sup + u0_sup;

  double xz_sup = 0.0, x_sup = log.x0_sup, u_sup = u0_sup, xi_sup = 0.0, d_sup = 0.0;
  double b_sup = 0.0;
  std::size_t b_idx = 0;
  for (const LogRow& row : log.rows) {
    xz_sup = std::max(xz_sup, norm2(row.z) + std::abs(row.w));
    x_sup = std::max(x_sup, norm2(row.x));
    u_sup = std::max(u_sup, std::abs(row.u));
    xi_sup = std::max(xi_sup, std::abs(row.xi));
    d_sup = std::max(d_sup, norm2(row.d));
    while (b_idx < log.sample_times.size() && log.sample_times[b_idx] <= row.t + 1e-12) {
      b_sup = std::max(b_sup, log.sample_perturbations[b_idx]);
      ++b_idx;
    }
    const double lhs = xz_sup + x_sup + u_sup;
    if (!(lhs > 0.0)) continue;
    const double damping = -std::expm1(-2.0 * omega * log.T1 * std::exp(-b_sup));
    const double log_base =
        std::log(7.0 * (1.0 + gamma_env)) + beta * log.T2 - 0.5 * std::log(damping);
    const double scale = init + xi_sup + plant.disturbance_bound * d_sup;
    // Rows at hold instants are post-jump, so a row at time t carries the
    // control of the holding interval starting at or before t: the envelope
    // iterates floor(t/T2) + 1 times, never zero.
    const double intervals = std::floor(row.t / log.T2) + 1.0;
    const double log_rhs = intervals * log_base + std::log(std::max(scale, lhs * 1e-300));
    v.growth_margin = std::min(v.growth_margin, log_rhs - std::log(lhs));
  }
  if (!std::isfinite(v.growth_margin)) v.growth_margin = 0.0;
  return v;
}

// ---------------------------------------------------------------------------
// Dead-beat demonstration on a linear plant: exact event marching by matrix
// exponentials (no ODE solver error anywhere in this path).
// ---------------------------------------------------------------------------

SimulationLog deadbeat_demo(const Mat& a, const Vec& b, const Vec& c, double T, double r,
                            double tau, int horizon_steps, const Vec& x0, Vec gain) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n || static_cast<int>(c.size()) != n ||
      static_cast<int>(x0.size()) != n) {
    throw std::invalid_argument("deadbeat_demo dimensions are inconsistent");
  }
  if (!(T > 0.0) || r < 0.0 || tau < 0.0 || !(r + tau < T)) {
    throw std::invalid_argument("deadbeat_demo needs 0 <= r + tau < T");
  }
  if (horizon_steps < 1) throw std::invalid_argument("horizon_steps must be >= 1");
  if (gain.empty()) {
    gain = deadbeat_gain(a, b, T);
  } else if (static_cast<int>(gain.size()) != n) {
    throw std::invalid_argument("gain must match the plant dimension");
  }

  const double horizon = horizon_steps * T;
  struct Node {
    double t;
    int hold = -1;  // hold index j at t = jT
    int read = -1;  // sample read for index j at t = jT - r
    bool plot = false;
  };
  std::vector<Node> nodes;
  for (int j = 0; j <= horizon_steps; ++j) {
    nodes.push_back({j * T, j, (r == 0.0 ? j : -1), false});
    if (r > 0.0 && j * T - r >= 0.0) nodes.push_back({j * T - r, -1, j, false});
    if (tau > 0.0 && j * T + tau <= horizon + kEventTol) nodes.push_back({j * T + tau, -1, -1, false});
  }
  const int plot_div = 16;
  for (int j = 0; j < horizon_steps * plot_div; ++j) {
    nodes.push_back({j * (T / plot_div), -1, -1, true});
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& u, const Node& v) { return u.t < v.t; });
  std::vector<Node> merged;
  for (const Node& nd : nodes) {
    if (!merged.empty() && nd.t - merged.back().t <= kEventTol) {
      Node& m = merged.back();
      if (nd.hold >= 0) {
        m.hold = nd.hold;
        m.t = nd.t;  // hold instants anchor the input breakpoints
      }
      if (nd.read >= 0) m.read = nd.read;
    } else {
      merged.push_back(nd);
    }
  }

  PiecewiseConstantSignal u_sig({-tau - 1.0, 0.0}, {0.0});
  std::vector<double> y_hist, u_hist;
  std::map<double, std::pair<Mat, Vec>> zoh_cache;
  auto propagator = [&](double len) -> const std::pair<Mat, Vec>& {
    auto it = zoh_cache.find(len);
    if (it == zoh_cache.end()) it = zoh_cache.emplace(len, zoh_discretization(a, b, len)).first;
    return it->second;
  };
  const Mat pred_a = matrix_exponential(a, r + tau);
  const Mat psi = integral_exponential(a, r + tau);
  const Vec pred_b = mul(psi, b);

  SimulationLog log;
  log.n = n;
  log.z0 = Vec(static_cast<std::size_t>(n), 0.0);
  log.w0 = 0.0;
  log.x0_sup = norm2(x0);
  log.x_history = [x0](double) { return x0; };
  log.T1 = T;
  log.T2 = T;
  log.r = r;
  log.tau = tau;

  Vec x = x0;
  Vec latest_recon(static_cast<std::size_t>(n), 0.0);
  double latest_y = dot(c, x0);
  double t_prev = merged.front().t;
  for (std::size_t idx = 0; idx < merged.size(); ++idx) {
    const Node& nd = merged[idx];
    if (nd.t > t_prev + kEventTol) {
      const auto& [ad, bd] = propagator(nd.t - t_prev);
      const double v = u_sig(0.5 * (t_prev + nd.t) - tau);
      Vec xn = mul(ad, x);
      for (int i = 0; i < n; ++i) xn[i] += bd[i] * v;
      x = std::move(xn);
    }
    if (nd.read >= 0) {
      // y_j = c' x(jT - r); with r = 0 this is the state at the hold itself.
      while (static_cast<int>(y_hist.size()) <= nd.read) y_hist.push_back(0.0);
      y_hist[nd.read] = dot(c, (nd.read == 0 && r > 0.0) ? x0 : x);
    }
    if (nd.hold >= 0) {
      const int j = nd.hold;
      if (j == 0 && y_hist.empty()) y_hist.push_back(dot(c, x0));
      latest_y = y_hist[static_cast<std::size_t>(j)];
      double u_val = 0.0;
      if (j >= n) {
        const Vec eta = lti_reconstruct(
            a, b, c, T, r, tau,
            std::span<const double>(y_hist.data() + (j - n + 1), static_cast<std::size_t>(n)),
            std::span<const double>(u_hist.data() + (j - n), static_cast<std::size_t>(n)));
        Vec pred = mul(pred_a, eta);
        for (int i = 0; i < n; ++i) pred[i] += pred_b[i] * u_hist[j - 1];
        latest_recon = eta;
        u_val = dot(gain, pred);
      }
      u_hist.push_back(u_val);
      const double next_hold = (j + 1 <= horizon_steps) ? (j + 1) * T : horizon + tau + 1.0;
      u_sig.append(u_val, next_hold - u_sig.domain_end());
      log.sample_times.push_back(nd.t);
      log.sample_perturbations.push_back(0.0);
    }
    LogRow row;
    row.t = nd.t;
    row.x = x;
    row.z = latest_recon;
    row.w = latest_y;
    row.u = u_sig(std::min(nd.t, std::nextafter(u_sig.domain_end(), u_sig.domain_start())));
    row.d = Vec(static_cast<std::size_t>(n), 0.0);
    row.xi = 0.0;
    row.sample_event = nd.hold >= 0;  // sampling and holding share the instants jT
    row.hold_event = nd.hold >= 0;
    log.rows.push_back(std::move(row));
    t_prev = nd.t;
  }
  log.input = u_sig;
  return log;
}

}  // namespace predfb
