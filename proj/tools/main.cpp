// Command-line front end: scenario runs, the built-in benchmark, gain
// feasibility reports, predictor calibration, one-shot prediction, and the
// linear dead-beat demonstration.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "predfb/gains.hpp"
#include "predfb/runner.hpp"

namespace {

using namespace predfb;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

void print_vec(const char* label, const Vec& v) {
  std::printf("%s", label);
  for (double x : v) std::printf(" %.17g", x);
  std::printf("\n");
}

double final_state_norm(const SimulationLog& log) {
  return log.rows.empty() ? 0.0 : norm2(log.rows.back().x);
}

int run_scenario_cmd(const std::string& config, const std::string& csv, const std::string& svg,
                     const std::string& columns) {
  const Scenario sc = load_scenario(config);
  const SimulationLog log = run_closed_loop(sc);
  std::printf("scenario %s: %zu rows over [0, %g]\n", sc.name.c_str(), log.rows.size(),
              sc.horizon);
  std::printf("final |x| = %.6e, final u = %.6e\n", final_state_norm(log),
              log.rows.back().u);
  int rc = 0;
  if (sc.family == Family::ApproxLipschitz) {
    const double rho = sc.predictor.contraction(sc.plant);
    double khat = 0.0;
    if (rho < 1.0) khat = calibrate_K(sc.predictor, sc.plant, 32, 2024);
    const LogValidation v = validate_log(log, sc, khat);
    std::printf("energy bound: %s (worst margin %.3e at t = %.4f)\n",
                v.energy.holds ? "holds" : "VIOLATED", v.energy.worst_margin,
                v.energy.worst_time);
    if (v.growth_checked) {
      std::printf("growth envelope: %s (min log-margin %.3e)\n",
                  v.growth_margin >= -1e-9 ? "holds" : "exceeded (diagnostic)",
                  v.growth_margin);
    } else {
      std::printf("growth envelope: skipped (contraction ratio %.4f)\n", rho);
    }
    if (!v.energy.holds) rc = 1;
  }
  if (!csv.empty()) {
    emit_csv(log, csv);
    std::printf("wrote %s\n", csv.c_str());
  }
  if (!svg.empty()) {
    std::vector<std::string> cols;
    if (columns.empty()) {
      for (int i = 1; i <= log.n; ++i) cols.push_back("x" + std::to_string(i));
      cols.push_back("u");
    } else {
      std::stringstream ss(columns);
      std::string item;
      while (std::getline(ss, item, ',')) cols.push_back(item);
    }
    emit_plot(log, svg, cols);
    std::printf("wrote %s\n", svg.c_str());
  }
  return rc;
}

int section5_cmd(const std::string& csv, const std::string& svg) {
  const Scenario sc = benchmark_scenario();
  const SimulationLog log = run_closed_loop(sc);

  // Decay summary: peak of |x| overall vs. the tail of the run.
  double peak = 0.0, tail = 0.0;
  for (const LogRow& row : log.rows) {
    const double nx = norm2(row.x);
    peak = std::max(peak, nx);
    if (row.t >= 15.0) tail = std::max(tail, nx);
  }
  std::printf("benchmark run: %zu rows, peak |x| = %.6e, sup |x| on [15, 20] = %.6e\n",
              log.rows.size(), peak, tail);

  const LogValidation v = validate_log(log, sc, 0.0);
  std::printf("energy bound: %s (worst margin %.3e at t = %.4f)\n",
              v.energy.holds ? "holds" : "VIOLATED", v.energy.worst_margin, v.energy.worst_time);
  std::printf("growth envelope: skipped (contraction ratio %.4f >= 1, bound is vacuous)\n",
              sc.predictor.contraction(sc.plant));

  if (!csv.empty()) {
    emit_csv(log, csv);
    std::printf("wrote %s\n", csv.c_str());
  }
  if (!svg.empty()) {
    emit_plot(log, svg, {"x1", "x2", "z1", "z2", "u"});
    std::printf("wrote %s\n", svg.c_str());
  }
  return v.energy.holds ? 0 : 1;
}

GainCertificate parse_certificate(const std::string& config) {
  std::ifstream f(config);
  if (!f) throw std::runtime_error("cannot open " + config);
  nlohmann::json j;
  f >> j;
  if (!j.contains("certificate")) {
    throw std::runtime_error("config has no \"certificate\" block");
  }
  const nlohmann::json& c = j["certificate"];
  auto mat = [](const nlohmann::json& m) {
    Mat out(static_cast<int>(m.size()), static_cast<int>(m.front().size()));
    for (int i = 0; i < out.rows(); ++i)
      for (int k = 0; k < out.cols(); ++k) out(i, k) = m[i][k].get<double>();
    return out;
  };
  auto vec = [](const nlohmann::json& v) {
    Vec out;
    for (const auto& e : v) out.push_back(e.get<double>());
    return out;
  };
  GainCertificate cert;
  cert.P = mat(c.at("P"));
  cert.Q = mat(c.at("Q"));
  cert.k = vec(c.at("k"));
  cert.p = vec(c.at("p"));
  cert.mu = c.at("mu").get<double>();
  cert.gamma = c.value("gamma", 0.0);
  cert.q = c.at("q").get<double>();
  cert.theta = c.at("theta").get<double>();
  cert.T1 = c.at("T1").get<double>();
  cert.T2 = c.at("T2").get<double>();
  cert.l = c.value("iterations", 1);
  cert.m = c.value("subintervals", 1);
  cert.K = c.value("K", 0.0);
  return cert;
}

int gains_check_cmd(const std::string& config) {
  const Scenario sc = load_scenario(config);
  if (sc.family != Family::ApproxLipschitz) {
    throw std::runtime_error("gains-check needs an approx_lipschitz scenario");
  }
  const GainCertificate cert = parse_certificate(config);
  const FeasibilityReport rep = check_feasibility(cert, sc.plant);
  auto line = [](const char* name, const ConditionReport& c) {
    std::printf("%-14s %s  lhs = %.6e  rhs = %.6e  margin = %.6e\n", name,
                c.holds ? "PASS" : "FAIL", c.lhs, c.rhs, c.margin);
  };
  line("sampling-rate", rep.sampling_rate);
  line("gain-floor", rep.gain_floor);
  line("holding-rate", rep.holding_rate);
  std::printf("omega = %.12f, beta = %.12f\n", rep.omega, rep.beta);
  std::printf("rho = %.6f (%s), a = %.6f, K1 = %.6f, K2 = %.6f\n", rep.rho,
              rep.rho_contractive ? "contractive" : "NOT contractive", rep.a, rep.K1, rep.K2);
  if (rep.sigma_cap > 0.0) std::printf("admissible decay cap sigma = %.6f\n", rep.sigma_cap);
  std::printf("window growth factor (log) at b = 0: %.6f\n",
              stability_envelope_log(cert, sc.plant, 0.0));
  std::printf("overall: %s\n", rep.all_hold ? "PASS" : "FAIL");
  return rep.all_hold ? 0 : 1;
}

int calibrate_k_cmd(const std::string& config, int samples, std::uint64_t seed) {
  const Scenario sc = load_scenario(config);
  if (sc.family != Family::ApproxLipschitz) {
    throw std::runtime_error("calibrate-k needs an approx_lipschitz scenario");
  }
  const double rho = sc.predictor.contraction(sc.plant);
  const double K = calibrate_K(sc.predictor, sc.plant, samples, seed);
  std::printf("contraction ratio rho = %.6f\n", rho);
  std::printf("calibrated K = %.17g (%d samples, seed %llu)\n", K, samples,
              static_cast<unsigned long long>(seed));
  if (rho < 1.0) {
    std::printf("error bound at |x| = 1, sup|u| = 1: %.6e\n",
                error_bound(sc.predictor, sc.plant, K, 1.0, 1.0));
  } else {
    std::printf("error bound: vacuous (rho >= 1)\n");
  }
  return 0;
}

int predict_cmd(const std::string& config, const std::string& state_text,
                const std::string& history_text) {
  const Scenario sc = load_scenario(config);
  const Vec state = parse_list(state_text);
  const Vec history = parse_list(history_text);
  if (history.empty()) throw std::runtime_error("--history needs at least one value");

  double window = 0.0;
  switch (sc.family) {
    case Family::ApproxLipschitz:
      window = sc.plant.r + sc.plant.tau;
      break;
    case Family::LtiExact:
      window = sc.lti.r + sc.lti.tau;
      break;
    case Family::ExactFeedforward:
      window = sc.ff.r + sc.ff.tau;
      break;
  }
  // Equal-duration input segments covering [-window, 0).
  std::vector<double> bps(history.size() + 1);
  for (std::size_t i = 0; i < bps.size(); ++i) {
    bps[i] = -window + window * static_cast<double>(i) / static_cast<double>(history.size());
  }
  bps.back() = 0.0;
  const PiecewiseConstantSignal u(bps, history);
  const HistoryWindow win{&u, 0.0, window, true};

  switch (sc.family) {
    case Family::ApproxLipschitz: {
      if (static_cast<int>(state.size()) != sc.plant.n) {
        throw std::runtime_error("--state must have the plant dimension");
      }
      print_vec("predicted state:", phi_lm(state, win, sc.predictor, sc.plant));
      break;
    }
    case Family::LtiExact: {
      if (static_cast<int>(state.size()) != sc.lti.A.rows()) {
        throw std::runtime_error("--state must have the plant dimension");
      }
      print_vec("predicted state:", lti_predict(state, win, sc.lti.A, sc.lti.B));
      break;
    }
    case Family::ExactFeedforward: {
      if (state.size() != 3) throw std::runtime_error("--state must have 3 components");
      const auto p = predict_ff({state[0], state[1], state[2]}, history.back(), window);
      print_vec("predicted state:", Vec(p.begin(), p.end()));
      break;
    }
  }
  return 0;
}

int deadbeat_cmd(double T, double r, double tau, int steps, const std::string& gain_text,
                 const std::string& csv, const std::string& svg) {
  const Mat a{{0.0, 1.0}, {0.0, 0.0}};
  const Vec b{0.0, 1.0};
  const Vec c{1.0, 0.0};
  const Vec x0{1.0, -0.5};
  Vec gain;
  if (!gain_text.empty()) gain = parse_list(gain_text);
  const bool custom_gain = !gain.empty();

  const SimulationLog log = deadbeat_demo(a, b, c, T, r, tau, steps, x0, gain);
  const int n = 2;
  const double settle = (2 * n) * T + tau;  // warm-up + dead-beat horizon
  double worst = 0.0;
  for (const LogRow& row : log.rows) {
    if (row.t >= settle - 1e-9) worst = std::max(worst, norm2(row.x));
  }
  std::printf("double integrator, T = %g, r = %g, tau = %g\n", T, r, tau);
  std::printf("predicted settling time: %g\n", settle);
  std::printf("sup |x| after settling: %.3e over %d periods\n", worst, steps);
  if (!csv.empty()) {
    emit_csv(log, csv);
    std::printf("wrote %s\n", csv.c_str());
  }
  if (!svg.empty()) {
    emit_plot(log, svg, {"x1", "x2", "u"});
    std::printf("wrote %s\n", svg.c_str());
  }
  if (!custom_gain && worst > 1e-9) {
    std::printf("dead-beat invariant VIOLATED (expected |x| <= 1e-9)\n");
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictor-based sampled-data output feedback for delayed plants"};
  app.require_subcommand(1);

  std::string config, csv, svg, columns, state_text, history_text, gain_text;
  int samples = 200;
  std::uint64_t seed = 1;
  double T = 0.5, r = 0.125, tau = 0.125;
  int steps = 12;

  CLI::App* run = app.add_subcommand("run", "Run a scenario from a JSON config");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);
  run->add_option("--csv", csv, "Write the trajectory log as CSV");
  run->add_option("--svg", svg, "Write an SVG plot");
  run->add_option("--columns", columns, "Comma-separated plot columns");

  CLI::App* bench = app.add_subcommand("section5", "Run the built-in benchmark example");
  bench->add_option("--csv", csv, "Write the trajectory log as CSV");
  bench->add_option("--svg", svg, "Write an SVG plot");

  CLI::App* gains = app.add_subcommand("gains-check", "Check a gain certificate's conditions");
  gains->add_option("config", config)->required()->check(CLI::ExistingFile);

  CLI::App* calib = app.add_subcommand("calibrate-k", "Calibrate the predictor constant K");
  calib->add_option("config", config)->required()->check(CLI::ExistingFile);
  calib->add_option("--samples", samples, "Probe count");
  calib->add_option("--seed", seed, "RNG seed");

  CLI::App* pred = app.add_subcommand("predict", "One-shot state prediction");
  pred->add_option("config", config)->required()->check(CLI::ExistingFile);
  pred->add_option("--state", state_text, "Comma-separated state estimate")->required();
  pred->add_option("--history", history_text, "Comma-separated input history values")
      ->required();

  CLI::App* db = app.add_subcommand("deadbeat-demo", "Dead-beat double integrator demo");
  db->add_option("--period", T, "Sampling/holding period");
  db->add_option("--r", r, "Measurement delay");
  db->add_option("--tau", tau, "Input delay");
  db->add_option("--steps", steps, "Periods to simulate");
  db->add_option("--gain", gain_text, "Override feedback gain (comma-separated)");
  db->add_option("--csv", csv, "Write the trajectory log as CSV");
  db->add_option("--svg", svg, "Write an SVG plot");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_scenario_cmd(config, csv, svg, columns);
    if (bench->parsed()) return section5_cmd(csv, svg);
    if (gains->parsed()) return gains_check_cmd(config);
    if (calib->parsed()) return calibrate_k_cmd(config, samples, seed);
    if (pred->parsed()) return predict_cmd(config, state_text, history_text);
    if (db->parsed()) return deadbeat_cmd(T, r, tau, steps, gain_text, csv, svg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
