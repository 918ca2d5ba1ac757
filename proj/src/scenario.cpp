#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "predfb/runner.hpp"

// JSON scenario schema (see configs/ for worked examples):
//   name, family, horizon, step, seed, sampling_period, holding_period,
//   delays {r, tau}, plant {...}, controller {...}, observer {theta, p},
//   predictor {iterations, subintervals, grid}, initial {x, u, z, w},
//   disturbance / noise / perturbation {kind, amplitude, frequency, phase, seed}.

namespace predfb {
namespace {

using nlohmann::json;

Vec to_vec(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array of numbers");
  Vec v;
  v.reserve(j.size());
  for (const auto& e : j) v.push_back(e.get<double>());
  return v;
}

Mat to_mat(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a JSON matrix");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.front().size());
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) {
      throw std::invalid_argument("ragged JSON matrix");
    }
    for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

SignalSpec parse_signal(const json& j, const std::string& what) {
  SignalSpec s;
  if (j.is_null()) return s;
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") {
    s.kind = SignalSpec::Kind::Zero;
  } else if (kind == "constant") {
    s.kind = SignalSpec::Kind::Constant;
  } else if (kind == "sinusoid") {
    s.kind = SignalSpec::Kind::Sinusoid;
  } else if (kind == "uniform_steps") {
    s.kind = SignalSpec::Kind::UniformSteps;
  } else {
    throw std::invalid_argument("unknown " + what + " kind: " + kind);
  }
  s.amplitude = j.value("amplitude", 0.0);
  s.frequency = j.value("frequency", 0.0);
  s.phase = j.value("phase", 0.0);
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

Family parse_family(const std::string& name) {
  if (name == "exact_feedforward") return Family::ExactFeedforward;
  if (name == "approx_lipschitz") return Family::ApproxLipschitz;
  if (name == "lti_exact") return Family::LtiExact;
  throw std::invalid_argument("unknown scenario family: " + name);
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  const json j = json::parse(json_text);
  Scenario sc;
  sc.name = j.value("name", "scenario");
  sc.family = parse_family(j.value("family", "approx_lipschitz"));
  sc.horizon = j.value("horizon", 20.0);
  sc.step = j.value("step", 0.0);
  sc.seed = j.value("seed", std::uint64_t{0});
  sc.T1 = j.value("sampling_period", 0.03);
  sc.T2 = j.value("holding_period", 0.01);

  double r = 0.25, tau = 0.25;
  if (j.contains("delays")) {
    r = j["delays"].value("r", 0.25);
    tau = j["delays"].value("tau", 0.25);
  }

  const json plant = j.value("plant", json::object());
  switch (sc.family) {
    case Family::ApproxLipschitz: {
      const std::string kind = plant.value("kind", "benchmark");
      if (kind == "benchmark") {
        sc.plant = benchmark_plant(r, tau);
      } else if (kind == "chain") {
        sc.plant = linear_chain_plant(plant.value("n", 2), r, tau);
      } else {
        throw std::invalid_argument("unknown Lipschitz plant kind: " + kind);
      }
      if (j.contains("controller")) sc.k = to_vec(j["controller"].at("k"));
      if (j.contains("observer")) {
        sc.observer.theta = j["observer"].value("theta", 1.0);
        sc.observer.p = to_vec(j["observer"].at("p"));
      }
      break;
    }
    case Family::ExactFeedforward: {
      sc.ff.r = r;
      sc.ff.tau = tau;
      sc.ff.T = plant.value("period", 0.5);
      sc.ff.eps = plant.value("eps", 0.1);
      const std::string outputs = plant.value("outputs", "two");
      if (outputs == "two") {
        sc.ff.output_case = OutputCase::TwoOutput;
      } else if (outputs == "one") {
        sc.ff.output_case = OutputCase::OneOutput;
      } else {
        throw std::invalid_argument("outputs must be \"two\" or \"one\"");
      }
      if (j.contains("controller")) {
        const json& g = j["controller"];
        sc.ff_gains.K0 = g.value("K0", 0.0);
        sc.ff_gains.K1 = g.value("K1", 0.0);
        sc.ff_gains.K2 = g.value("K2", 0.0);
        sc.ff_gains.R1 = g.value("R1", 0.0);
        sc.ff_gains.R2 = g.value("R2", 0.0);
      }
      break;
    }
    case Family::LtiExact: {
      sc.lti.A = to_mat(plant.at("A"));
      sc.lti.B = to_vec(plant.at("B"));
      sc.lti.c = to_vec(plant.at("c"));
      if (plant.contains("G")) sc.lti.G = to_mat(plant["G"]);
      sc.lti.r = r;
      sc.lti.tau = tau;
      if (j.contains("controller")) sc.lti_k = to_vec(j["controller"].at("k"));
      if (j.contains("observer")) sc.lti_p = to_vec(j["observer"].at("p"));
      break;
    }
  }

  if (j.contains("predictor")) {
    const json& p = j["predictor"];
    sc.predictor.l = p.value("iterations", 1);
    sc.predictor.m = p.value("subintervals", 1);
    sc.predictor.quad_nodes = p.value("grid", sc.predictor.quad_nodes);
  }

  if (j.contains("initial")) {
    const json& ini = j["initial"];
    if (ini.contains("x")) sc.x0 = to_vec(ini["x"]);
    sc.u0 = ini.value("u", 0.0);
    if (ini.contains("z")) sc.z0 = to_vec(ini["z"]);
    sc.w0 = ini.value("w", 0.0);
  }
  if (sc.x0.empty()) sc.x0 = Vec(static_cast<std::size_t>(sc.state_dim()), 0.0);

  sc.disturbance = parse_signal(j.value("disturbance", json()), "disturbance");
  sc.noise = parse_signal(j.value("noise", json()), "noise");
  sc.perturbation = parse_signal(j.value("perturbation", json()), "perturbation");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace predfb
