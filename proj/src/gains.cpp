#include "predfb/gains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace predfb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shift-chain system matrix of the strict-feedback form and its input vector.
Mat chain_matrix(int n) {
  Mat a(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  return a;
}

// M'X + XM = -C by a dense Kronecker solve (n <= 4, so at most 16 unknowns).
Mat lyapunov_solve(const Mat& m, const Mat& c) {
  const int n = m.rows();
  const int nn = n * n;
  Mat s(nn, nn);
  Vec rhs(nn);
  auto idx = [n](int i, int j) { return i * n + j; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        s(idx(i, j), idx(k, j)) += m(k, i);
        s(idx(i, j), idx(i, k)) += m(k, j);
      }
      rhs[idx(i, j)] = -c(i, j);
    }
  }
  const Vec x = solve(s, rhs);
  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = 0.5 * (x[idx(i, j)] + x[idx(j, i)]);
  }
  return out;
}

Mat symmetrize(const Mat& m) {
  Mat out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) out(i, j) = 0.5 * (m(i, j) + m(j, i));
  }
  return out;
}

double quad_form(const Mat& p, const Vec& x) { return dot(x, mul(p, x)); }

// Closed-loop drift (A + bk')x + f(x) + diag(g(x,u)) d without building
// matrices: the chain structure makes every term index-local.
Vec closed_loop_drift(const StrictFeedbackPlant& plant, const Vec& k, const Vec& x, const Vec& d,
                      double u) {
  const int n = plant.n;
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = plant.f_eval(i, x);
    if (i + 1 < n) y[i] += x[i + 1];
    if (i == n - 1) y[i] += dot(k, x);
    if (d[i] != 0.0) y[i] += plant.g_eval(i, x, u) * d[i];
  }
  return y;
}

std::vector<Vec> sphere_directions(int n, int count, std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> dirs;
  if (n == 2) {
    for (int i = 0; i < 64; ++i) {
      const double phi = 2.0 * M_PI * i / 64.0;
      dirs.push_back({std::cos(phi), std::sin(phi)});
    }
  }
  while (static_cast<int>(dirs.size()) < count) {
    Vec v(n);
    for (auto& vi : v) vi = gauss(eng);
    const double nrm = norm2(v);
    if (nrm < 1e-8) continue;
    for (auto& vi : v) vi /= nrm;
    dirs.push_back(std::move(v));
  }
  return dirs;
}

}  // namespace

bool is_hurwitz(const Mat& m) {
  const int n = m.rows();
  if (n < 1 || n > 4 || m.cols() != n) {
    throw std::invalid_argument("stability test supports square matrices of order 1..4");
  }
  if (!all_finite(m)) throw std::invalid_argument("stability test needs finite entries");
  const std::vector<double> c = char_poly(m);
  for (double ci : c) {
    if (!(ci > 0.0)) return false;
  }
  if (n == 3) return c[0] * c[1] > c[2];
  if (n == 4) {
    const double d3 = (c[0] * c[1] - c[2]) * c[2] - c[0] * c[0] * c[3];
    return c[0] * c[1] > c[2] && d3 > 0.0;
  }
  return true;
}

Mat solve_observer_lyapunov(const Mat& a, const Vec& p, const Vec& c, double q) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(p.size()) != n || static_cast<int>(c.size()) != n) {
    throw std::invalid_argument("Lyapunov solve dimensions do not match");
  }
  if (!(q > 0.0)) throw std::invalid_argument("Lyapunov level q must be positive");
  const Mat m = a + outer(p, c);
  if (!is_hurwitz(m)) throw std::invalid_argument("A + pc' must be Hurwitz");

  const double q_solve = q * (1.0 + 1e-9);
  const Mat qmat = lyapunov_solve(m, (2.0 * q_solve) * Mat::identity(n));

  const auto eigs = sym_eigenvalues(qmat);
  if (!(eigs.front() > 0.0)) {
    throw std::runtime_error("Lyapunov solve produced a non positive definite matrix");
  }
  const Mat residual = symmetrize(qmat * m + transpose(m) * qmat + (2.0 * q) * Mat::identity(n));
  const auto res_eigs = sym_eigenvalues(residual);
  if (res_eigs.back() > 1e-10 * std::max(1.0, 2.0 * q)) {
    throw std::runtime_error("Lyapunov residual check failed");
  }
  return qmat;
}

ProbeReport certify_decay(const Mat& P, const Vec& k, double mu, double gamma,
                          const StrictFeedbackPlant& plant, int probes, std::uint64_t seed) {
  const int n = plant.n;
  if (P.rows() != n || P.cols() != n || static_cast<int>(k.size()) != n) {
    throw std::invalid_argument("certificate dimensions do not match");
  }
  if (!(mu > 0.0) || !(gamma >= 0.0)) {
    throw std::invalid_argument("certificate needs mu > 0 and gamma >= 0");
  }
  if (probes < 1) throw std::invalid_argument("certification needs at least one probe");

  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> log_radius(-3.0, 3.0);
  std::uniform_real_distribution<double> input(-3.0, 3.0);
  std::uniform_int_distribution<int> with_d(0, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ProbeReport report;
  report.worst_margin = kInf;
  const Vec zero(n, 0.0);

  auto evaluate = [&](const Vec& x, const Vec& d, double u) {
    const Vec drift = closed_loop_drift(plant, k, x, d, u);
    const double lhs = dot(mul(P, x), drift);
    const double rhs = -2.0 * mu * quad_form(P, x) + gamma * dot(d, d);
    const double scale = dot(x, x) + dot(d, d);
    if (scale <= 0.0) return;
    const double margin = (rhs - lhs) / scale;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_x = x;
      report.worst_d = d;
      report.worst_u = u;
    }
  };

  // Coarse deterministic grid: planar direction fan at logarithmic radii.
  if (n == 2) {
    for (int ai = 0; ai < 48; ++ai) {
      const double phi = 2.0 * M_PI * ai / 48.0;
      for (int ri = -3; ri <= 3; ++ri) {
        const double radius = std::pow(10.0, ri);
        evaluate({radius * std::cos(phi), radius * std::sin(phi)}, zero, 0.0);
      }
    }
  }

  for (int s = 0; s < probes; ++s) {
    Vec x(n);
    for (auto& xi : x) xi = gauss(eng);
    const double nrm = norm2(x);
    if (nrm < 1e-8) continue;
    const double radius = std::pow(10.0, log_radius(eng));
    for (auto& xi : x) xi *= radius / nrm;

    Vec d = zero;
    if (with_d(eng) != 0) {
      for (auto& di : d) di = gauss(eng);
      const double dn = norm2(d);
      if (dn >= 1e-8) {
        const double dr = std::pow(10.0, log_radius(eng));
        for (auto& di : d) di *= dr / dn;
      } else {
        d = zero;
      }
    }
    evaluate(x, d, input(eng));
  }

  report.pass = report.worst_margin >= -1e-10;
  return report;
}

DecayCertificate find_decay_certificate(const Vec& k, const StrictFeedbackPlant& plant,
                                        int probes, std::uint64_t seed) {
  const int n = plant.n;
  if (static_cast<int>(k.size()) != n) {
    throw std::invalid_argument("feedback gain length must match the plant order");
  }
  const double L = plant.lipschitz;
  const double G = plant.disturbance_bound;

  Mat a_cl = chain_matrix(n);
  for (int j = 0; j < n; ++j) a_cl(n - 1, j) += k[j];

  std::mt19937_64 eng(seed);
  const std::vector<Vec> dirs = sphere_directions(n, 128, eng);
  std::vector<double> radii;
  for (int ri = -6; ri <= 6; ++ri) radii.push_back(std::pow(10.0, 0.5 * ri));

  DecayCertificate best;
  best.worst_margin = -kInf;
  int candidate = 0;
  for (double kappa : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    Mat shifted = a_cl;
    shifted(0, 0) += kappa * L;
    if (!is_hurwitz(shifted)) continue;
    for (double w : {1.0, 0.3, 0.1, 0.03}) {
      ++candidate;
      Mat rhs(n, n);
      double wj = 1.0;
      for (int j = 0; j < n; ++j) {
        rhs(j, j) = wj;
        wj *= w;
      }
      Mat P;
      try {
        P = lyapunov_solve(shifted, rhs);
      } catch (const std::runtime_error&) {
        continue;
      }
      const auto eigs = sym_eigenvalues(P);
      if (!(eigs.front() > 0.0)) continue;
      const double k1 = eigs.front(), k2 = eigs.back();

      // Achievable disturbance-free decay rate along probe rays.
      double mu_hat = kInf;
      const Vec zero(n, 0.0);
      for (const Vec& dir : dirs) {
        for (double radius : radii) {
          Vec x(n);
          for (int i = 0; i < n; ++i) x[i] = radius * dir[i];
          const double px_x = quad_form(P, x);
          const double lhs = dot(mul(P, x), closed_loop_drift(plant, k, x, zero, 0.0));
          mu_hat = std::min(mu_hat, -lhs / (2.0 * px_x));
        }
      }
      if (!(mu_hat > 0.0)) continue;

      // Back off, then split the budget with the disturbance cross term.
      const double mu0 = 0.9 * mu_hat;
      const double mu = 0.5 * mu0;
      const double gamma = G * G * k2 * k2 / (4.0 * mu0 * k1);

      const ProbeReport probe =
          certify_decay(P, k, mu, gamma, plant, probes, seed + 1000003ULL * candidate);
      if (probe.pass && probe.worst_margin > best.worst_margin) {
        best.P = P;
        best.mu = mu;
        best.gamma = gamma;
        best.found = true;
        best.worst_margin = probe.worst_margin;
      }
    }
  }
  return best;
}

double g_ceiling(double t) {
  if (t <= 0.0) return 0.0;
  return std::ceil(t);
}

FeasibilityReport check_feasibility(const GainCertificate& cert, const StrictFeedbackPlant& plant) {
  const int n = plant.n;
  if (cert.P.rows() != n || cert.P.cols() != n || cert.Q.rows() != n || cert.Q.cols() != n ||
      static_cast<int>(cert.k.size()) != n || static_cast<int>(cert.p.size()) != n) {
    throw std::invalid_argument("certificate dimensions do not match the plant");
  }
  if (!(cert.q > 0.0) || !(cert.mu > 0.0) || !(cert.T1 > 0.0) || !(cert.T2 > 0.0) ||
      cert.l < 1 || cert.m < 1) {
    throw std::invalid_argument("certificate needs positive q, mu, T1, T2 and l, m >= 1");
  }
  const double L = plant.lipschitz;

  FeasibilityReport rep;
  const auto q_eigs = sym_eigenvalues(symmetrize(cert.Q));
  const auto p_eigs = sym_eigenvalues(symmetrize(cert.P));
  rep.a = q_eigs.front();
  rep.K1 = p_eigs.front();
  rep.K2 = p_eigs.back();
  const double q_norm = std::max(std::abs(q_eigs.front()), std::abs(q_eigs.back()));
  const double qp_norm = norm2(mul(cert.Q, cert.p));
  const double k_norm = norm2(cert.k);

  rep.omega = observer_growth_rate(plant, ObserverGains{cert.theta, cert.p});
  rep.beta = rep.omega + ((n + 1) * L + 3.0) / 2.0;
  const double window = plant.r + plant.tau;
  rep.rho = (n * L + 1.0) * window / cert.m;
  rep.rho_contractive = rep.rho < 1.0;
  const double predictor_tail =
      rep.rho_contractive ? cert.K * std::pow(rep.rho, cert.l + 1) / (1.0 - rep.rho) : kInf;
  rep.gamma_envelope = predictor_tail + std::exp(((n + 1) * L + 3.0) * window / 2.0);

  rep.sampling_rate.lhs = 4.0 * qp_norm * (L + cert.theta) * cert.T1 * std::sqrt(q_norm / rep.a);
  rep.sampling_rate.rhs = cert.q;
  rep.sampling_rate.margin = rep.sampling_rate.rhs - rep.sampling_rate.lhs;
  rep.sampling_rate.holds = rep.sampling_rate.lhs < rep.sampling_rate.rhs;

  rep.gain_floor.lhs = cert.theta;
  rep.gain_floor.rhs = std::max(1.0, 2.0 * q_norm * L * std::sqrt(double(n)) / cert.q);
  rep.gain_floor.margin = rep.gain_floor.lhs - rep.gain_floor.rhs;
  rep.gain_floor.holds = rep.gain_floor.lhs >= rep.gain_floor.rhs;

  Vec b(n, 0.0);
  b[n - 1] = 1.0;
  const double bpb = quad_form(cert.P, b);
  rep.holding_rate.lhs = ((n * L + 1.0 + k_norm) * std::sqrt(bpb / (2.0 * rep.K1)) + cert.mu) *
                         k_norm * (cert.T2 + predictor_tail);
  rep.holding_rate.rhs = cert.mu;
  rep.holding_rate.margin = rep.holding_rate.rhs - rep.holding_rate.lhs;
  rep.holding_rate.holds = rep.holding_rate.lhs < rep.holding_rate.rhs;

  if (rep.sampling_rate.holds && rep.sampling_rate.lhs > 0.0) {
    const double from_sampling = std::log(cert.q / rep.sampling_rate.lhs) / cert.T1;
    rep.sigma_cap = std::min(from_sampling, cert.theta * cert.q / (8.0 * q_norm));
  }
  rep.all_hold = rep.sampling_rate.holds && rep.gain_floor.holds && rep.holding_rate.holds;
  return rep;
}

double stability_envelope_log(const GainCertificate& cert, const StrictFeedbackPlant& plant,
                              double b_sup) {
  const FeasibilityReport rep = check_feasibility(cert, plant);
  if (!rep.rho_contractive) return kInf;
  const double damping = -std::expm1(-2.0 * rep.omega * cert.T1 * std::exp(-b_sup));
  const double base_log =
      std::log(7.0 * (1.0 + rep.gamma_envelope)) + rep.beta * cert.T2 - 0.5 * std::log(damping);
  const double j = g_ceiling((plant.r + cert.T1) / cert.T2);
  return g_ceiling(j + plant.tau / cert.T2) * base_log;
}

}  // namespace predfb
