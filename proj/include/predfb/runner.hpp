#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "predfb/approx_predictor.hpp"
#include "predfb/exact_predictor.hpp"
#include "predfb/lti.hpp"
#include "predfb/observer.hpp"
#include "predfb/plants.hpp"
#include "predfb/sim_log.hpp"
#include "predfb/signals.hpp"

// Closed-loop simulation engine. Event-driven: the integrator stops exactly
// at every sampling instant, every hold instant, and every instant where the
// delayed input changes value, applies the jumps (sample -> hold, in that
// order), and resumes. Between events the flow is integrated with fixed-step
// classical RK4 and logged densely.

namespace predfb {

// Exogenous signal description. All randomness comes from `seed`, so a
// scenario replays bit-identically.
struct SignalSpec {
  enum class Kind { Zero, Constant, Sinusoid, UniformSteps };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  double frequency = 0.0;  // rad/s (Sinusoid)
  double phase = 0.0;      // rad (Sinusoid)
  std::uint64_t seed = 0;  // (UniformSteps)
};

enum class Family {
  ExactFeedforward,  // feedforward chain: algebraic reconstruction, exact predictor
  ApproxLipschitz,   // strict-feedback plant: high-gain observer, Picard predictor
  LtiExact           // linear plant: Luenberger observer, exact ZOH predictor
};

struct Scenario {
  std::string name = "scenario";
  Family family = Family::ApproxLipschitz;

  // ApproxLipschitz family.
  StrictFeedbackPlant plant;
  Vec k;  // nominal feedback row, u = k'x
  ObserverGains observer;
  PredictorConfig predictor;

  // ExactFeedforward family.
  FeedforwardPlant ff;
  FeedforwardGains ff_gains;

  // LtiExact family.
  LtiPlant lti;
  Vec lti_k;  // predictor feedback row
  Vec lti_p;  // observer injection column

  double T1 = 0.03;  // nominal sampling period (ignored by ExactFeedforward: ff.T)
  double T2 = 0.01;  // holding period (ignored by ExactFeedforward: ff.T)

  SignalSpec disturbance;   // d; one scalar draw shared by all matched channels
  SignalSpec noise;         // xi, added to sampled measurements
  SignalSpec perturbation;  // b >= 0; sample gap = T1 * exp(-b)

  Vec x0;           // constant plant history on [-r, 0]
  double u0 = 0.0;  // constant input history on [-(r+tau), 0) (warm-up window
                    // of length (p+l+1)*T for the feedforward family)
  Vec z0;           // observer initial state
  double w0 = 0.0;

  double horizon = 20.0;
  double step = 0.0;  // RK4 substep target; <= 0 picks min(T1, T2) / 20
  std::uint64_t seed = 0;

  int state_dim() const;            // plant dimension n
  double sampling_period() const;   // ff.T or T1
  double holding_period() const;    // ff.T or T2
  void validate() const;            // throws std::invalid_argument
};

// The two-state worked example: saturation-bounded nonlinearity, theta = 1,
// p = (-3, -3)', k = -(15, 9)', r = tau = 1/4, T1 = 0.03, T2 = 0.01,
// l = m = 1, x0 = (1, 1), u0 = -2, z0 = 0, w0 = 0, horizon 20.
Scenario benchmark_scenario();

SimulationLog run_closed_loop(const Scenario& sc);

// CSV schema: t,x1..xn,z1..zn,w,u,d1..dn,xi,event. Values are printed with
// "%.17g" so doubles round-trip exactly; event is empty, "sample", "hold" or
// "sample+hold".
void emit_csv(const SimulationLog& log, const std::string& path);
std::string csv_text(const SimulationLog& log);

// Standalone SVG line plot of the named columns (e.g. {"x1", "z1", "u"})
// against time. Throws std::invalid_argument for unknown column names.
void emit_plot(const SimulationLog& log, const std::string& path,
               const std::vector<std::string>& columns);

struct LogValidation {
  BoundCheck energy;            // observer energy inequality (ApproxLipschitz only)
  bool growth_checked = false;  // envelope evaluated only when the predictor contracts
  double growth_margin = 0.0;   // min over rows of log(envelope / observed); the
                                // envelope uses a measured gain, so a negative
                                // margin is a warning, not a rejection
  bool ok() const { return energy.holds; }
};

// Post-hoc invariants for an ApproxLipschitz log. calibrated_K feeds the
// closed-loop growth envelope; pass <= 0 to skip that check (it is also
// skipped when the Picard iteration does not contract, where the envelope
// is vacuous).
LogValidation validate_log(const SimulationLog& log, const Scenario& sc, double calibrated_K);

// JSON scenario I/O (schema documented in README and configs/ examples).
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

}  // namespace predfb
