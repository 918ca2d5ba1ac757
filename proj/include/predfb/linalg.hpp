#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

// Small dense linear algebra for desk-scale systems (dimensions <= 4 in
// practice, never more than a Kronecker-lifted 16x16 solve). Row-major.

namespace predfb {

using Vec = std::vector<double>;

class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols), 0.0) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(int n);

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  const std::vector<double>& data() const { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

Mat operator+(const Mat& x, const Mat& y);
Mat operator-(const Mat& x, const Mat& y);
Mat operator*(const Mat& x, const Mat& y);
Mat operator*(double s, const Mat& x);
Mat transpose(const Mat& x);

Vec mul(const Mat& a, const Vec& x);
double dot(const Vec& x, const Vec& y);
double norm2(const Vec& x);
double inf_norm_vec(const Vec& x);
double inf_norm(const Mat& x);
bool all_finite(const Mat& x);
bool all_finite(const Vec& x);

// Outer product x * y'.
Mat outer(const Vec& x, const Vec& y);

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws std::runtime_error if the matrix is numerically singular.
Vec solve(Mat a, Vec b);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> sym_eigenvalues(Mat s);

// Monic characteristic polynomial coefficients [c1, ..., cn] of an n x n
// matrix, i.e. det(sI - A) = s^n + c1 s^{n-1} + ... + cn (Faddeev-LeVerrier).
std::vector<double> char_poly(const Mat& a);

}  // namespace predfb
