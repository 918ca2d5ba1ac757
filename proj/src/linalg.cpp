#include "predfb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace predfb {

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  a_.reserve(static_cast<std::size_t>(rows_ * cols_));
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) throw std::invalid_argument("Mat: ragged initializer");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

static void check_same_shape(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("Mat: shape mismatch");
}

Mat operator+(const Mat& x, const Mat& y) {
  check_same_shape(x, y);
  Mat r(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) r(i, j) = x(i, j) + y(i, j);
  return r;
}

Mat operator-(const Mat& x, const Mat& y) {
  check_same_shape(x, y);
  Mat r(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) r(i, j) = x(i, j) - y(i, j);
  return r;
}

Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols() != y.rows()) throw std::invalid_argument("Mat: product shape mismatch");
  Mat r(x.rows(), y.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < x.cols(); ++k) {
      const double xik = x(i, k);
      for (int j = 0; j < y.cols(); ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

Mat operator*(double s, const Mat& x) {
  Mat r(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) r(i, j) = s * x(i, j);
  return r;
}

Mat transpose(const Mat& x) {
  Mat r(x.cols(), x.rows());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) r(j, i) = x(i, j);
  return r;
}

Vec mul(const Mat& a, const Vec& x) {
  if (a.cols() != static_cast<int>(x.size())) throw std::invalid_argument("mul: shape mismatch");
  Vec r(static_cast<std::size_t>(a.rows()), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[static_cast<std::size_t>(j)];
    r[static_cast<std::size_t>(i)] = s;
  }
  return r;
}

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double inf_norm_vec(const Vec& x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

double inf_norm(const Mat& x) {
  double m = 0;
  for (int i = 0; i < x.rows(); ++i) {
    double row = 0;
    for (int j = 0; j < x.cols(); ++j) row += std::fabs(x(i, j));
    m = std::max(m, row);
  }
  return m;
}

bool all_finite(const Mat& x) {
  for (double v : x.data())
    if (!std::isfinite(v)) return false;
  return true;
}

bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

Mat outer(const Vec& x, const Vec& y) {
  Mat r(static_cast<int>(x.size()), static_cast<int>(y.size()));
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) r(i, j) = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
  return r;
}

Vec solve(Mat a, Vec b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("solve: square system required");
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int i = col + 1; i < n; ++i)
      if (std::fabs(a(i, col)) > std::fabs(a(piv, col))) piv = i;
    if (std::fabs(a(piv, col)) < 1e-300) throw std::runtime_error("solve: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
      std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
    }
    for (int i = col + 1; i < n; ++i) {
      const double f = a(i, col) / a(col, col);
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      b[static_cast<std::size_t>(i)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  Vec x(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[static_cast<std::size_t>(j)];
    x[static_cast<std::size_t>(i)] = s / a(i, i);
  }
  return x;
}

std::vector<double> sym_eigenvalues(Mat s) {
  const int n = s.rows();
  if (s.cols() != n) throw std::invalid_argument("sym_eigenvalues: square matrix required");
  // Cyclic Jacobi; plenty for n <= 16.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> char_poly(const Mat& a) {
  const int n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("char_poly: square matrix required");
  if (!all_finite(a)) throw std::invalid_argument("char_poly: non-finite entries");
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  Mat m = a;
  for (int k = 1; k <= n; ++k) {
    double tr = 0;
    for (int i = 0; i < n; ++i) tr += m(i, i);
    const double ck = -tr / k;
    c[static_cast<std::size_t>(k - 1)] = ck;
    if (k == n) break;
    Mat shifted = m;
    for (int i = 0; i < n; ++i) shifted(i, i) += ck;
    m = a * shifted;
  }
  return c;
}

}  // namespace predfb
