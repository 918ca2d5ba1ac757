#include "predfb/lti.hpp"

#include <cmath>
#include <stdexcept>

namespace predfb {

Mat matrix_exponential(const Mat& a, double t) {
  const int n = a.rows();
  if (n == 0 || a.cols() != n) throw std::invalid_argument("matrix exponential needs a square matrix");
  if (!all_finite(a) || !std::isfinite(t)) {
    throw std::invalid_argument("matrix exponential needs finite entries");
  }
  Mat m = t * a;
  double norm = inf_norm(m);
  if (norm == 0.0) return Mat::identity(n);

  int squarings = 0;
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  m = std::ldexp(1.0, -squarings) * m;

  Mat sum = Mat::identity(n);
  Mat term = Mat::identity(n);
  for (int k = 1; k <= 64; ++k) {
    term = (1.0 / k) * (term * m);
    sum = sum + term;
    if (inf_norm(term) <= 1e-16 * std::max(1.0, inf_norm(sum))) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

Mat integral_exponential(const Mat& a, double h) {
  const int n = a.rows();
  if (n == 0 || a.cols() != n) throw std::invalid_argument("integral exponential needs a square matrix");
  // exp([[A, I], [0, 0]] h) = [[e^{Ah}, int_0^h e^{As} ds], [0, I]].
  Mat aug(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = 1.0;
  }
  const Mat e = matrix_exponential(aug, h);
  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = e(i, n + j);
  }
  return out;
}

std::pair<Mat, Vec> zoh_discretization(const Mat& a, const Vec& b, double T) {
  return {matrix_exponential(a, T), mul(integral_exponential(a, T), b)};
}

Vec lti_predict(const Vec& z, const HistoryWindow& u_window, const Mat& a, const Vec& b) {
  const int n = a.rows();
  if (static_cast<int>(z.size()) != n || static_cast<int>(b.size()) != n) {
    throw std::invalid_argument("prediction dimensions do not match");
  }
  if (u_window.signal == nullptr) throw std::invalid_argument("history window has no signal");
  const PiecewiseConstantSignal slice =
      u_window.signal->restricted(u_window.anchor - u_window.length, u_window.anchor);

  Vec state = z;
  const auto& bp = slice.breakpoints();
  const auto& vals = slice.values();
  for (std::size_t j = 0; j < vals.size(); ++j) {
    const double len = bp[j + 1] - bp[j];
    const Vec flowed = mul(matrix_exponential(a, len), state);
    const Vec driven = mul(integral_exponential(a, len), b);
    for (int i = 0; i < n; ++i) state[i] = flowed[i] + driven[i] * vals[j];
  }
  return state;
}

double lti_control(const Vec& z, const HistoryWindow& u_window, const Vec& k, const Mat& a,
                   const Vec& b) {
  return dot(k, lti_predict(z, u_window, a, b));
}

std::vector<double> poly_from_roots(const std::vector<double>& roots) {
  std::vector<double> coeffs;  // monic tail, grown one root at a time
  for (double root : roots) {
    coeffs.insert(coeffs.begin(), 1.0);
    for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) coeffs[i] = coeffs[i + 1] - root * coeffs[i];
    coeffs.back() *= -root;
  }
  return coeffs;
}

Vec place_feedback(const Mat& a, const Vec& b, const std::vector<double>& char_coeffs) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n ||
      static_cast<int>(char_coeffs.size()) != n) {
    throw std::invalid_argument("pole placement dimensions do not match");
  }
  Mat ctrb(n, n);
  Vec col = b;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) ctrb(i, j) = col[i];
    col = mul(a, col);
  }
  // Desired polynomial evaluated at A by Horner's scheme.
  Mat q = Mat::identity(n);
  for (int i = 0; i < n; ++i) q = q * a + char_coeffs[i] * Mat::identity(n);

  Vec last_row(n, 0.0);
  last_row[n - 1] = 1.0;
  Vec v;
  try {
    v = solve(transpose(ctrb), last_row);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("pair (A, B) is not reachable");
  }
  Vec k = mul(transpose(q), v);
  for (double& ki : k) ki = -ki;
  return k;
}

Vec place_injection(const Mat& a, const Vec& c, const std::vector<double>& char_coeffs) {
  if (a.cols() != a.rows() || c.size() != char_coeffs.size() ||
      static_cast<int>(c.size()) != a.rows()) {
    throw std::invalid_argument("pole placement dimensions do not match");
  }
  try {
    return place_feedback(transpose(a), c, char_coeffs);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("pair (A, c') is not observable");
  }
}

Vec deadbeat_gain(const Mat& a, const Vec& b, double T) {
  const auto [ad, bd] = zoh_discretization(a, b, T);
  return place_feedback(ad, bd, std::vector<double>(a.rows(), 0.0));
}

Vec lti_reconstruct(const Mat& a, const Vec& b, const Vec& c, double T, double r, double tau,
                    std::span<const double> y, std::span<const double> u) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n || static_cast<int>(c.size()) != n) {
    throw std::invalid_argument("reconstruction dimensions do not match");
  }
  if (static_cast<int>(y.size()) != n || static_cast<int>(u.size()) != n) {
    throw std::invalid_argument("reconstruction needs n samples and n inputs");
  }
  if (!(r >= 0.0) || !(tau >= 0.0) || !(r + tau < T)) {
    throw std::invalid_argument("reconstruction requires 0 <= r + tau < T");
  }

  const Mat ad = matrix_exponential(a, T);
  // Between consecutive samples (both delayed by r) the plant sees the
  // previous held input for r + tau seconds, then the current one.
  const Vec e1 = mul(matrix_exponential(a, T - r - tau), mul(integral_exponential(a, r + tau), b));
  const Vec e2 = mul(integral_exponential(a, T - r - tau), b);

  // eta_s = A_d^s eta_0 + v_s with v_0 = 0, v_s = A_d v_{s-1} + E1 u[s-1] + E2 u[s];
  // rows of the solve: y[s] = c' A_d^s eta_0 + c' v_s.
  Mat obs(n, n);
  Vec rhs(n);
  Vec row = c;  // c' A_d^s, grown per row
  Vec v(n, 0.0);
  for (int s = 0; s < n; ++s) {
    if (s > 0) {
      v = mul(ad, v);
      for (int i = 0; i < n; ++i) v[i] += e1[i] * u[s - 1] + e2[i] * u[s];
      row = mul(transpose(ad), row);
    }
    for (int j = 0; j < n; ++j) obs(s, j) = row[j];
    rhs[s] = y[s] - dot(c, v);
  }
  Vec eta0;
  try {
    eta0 = solve(obs, rhs);
  } catch (const std::runtime_error&) {
    throw std::invalid_argument("pair (A_d, c') is not observable");
  }
  Vec eta = eta0;
  v.assign(n, 0.0);
  for (int s = 1; s < n; ++s) {
    const Vec flowed = mul(ad, eta);
    for (int i = 0; i < n; ++i) eta[i] = flowed[i] + e1[i] * u[s - 1] + e2[i] * u[s];
  }
  return eta;
}

}  // namespace predfb
