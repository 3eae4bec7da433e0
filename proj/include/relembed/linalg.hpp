#pragma once

// Small dense linear algebra: vectors as std::vector<double>, a row-major
// matrix, and a one-sided Jacobi SVD. Sizes here are a few hundred at most.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace relembed {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline Vector scaled(std::span<const double> a, double s) {
  Vector out(a.begin(), a.end());
  for (auto& x : out) x *= s;
  return out;
}

/// Returns a with `extra` appended.
inline Vector appended(std::span<const double> a, std::initializer_list<double> extra) {
  Vector out(a.begin(), a.end());
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    assert(a.cols_ == b.rows_);
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A = U diag(sigma) V^T with singular values sorted in decreasing order.
/// Columns of U belonging to zero singular values are left as zero.
struct Svd {
  Vector sigma;
  Matrix u;  // rows x min(rows, cols)
  Matrix v;  // cols x min(rows, cols)
};

/// One-sided (Hestenes) Jacobi SVD. Orthogonalizes the columns of A by plane
/// rotations accumulated into V until every column pair has relative
/// correlation below `tol`.
inline Svd svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) {
    Svd t = svd(a.transposed(), tol, max_sweeps);
    std::swap(t.u, t.v);
    return t;
  }

  // Work column-major: w[j] is column j of A V.
  std::vector<Vector> w(n, Vector(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) w[j][i] = a(i, j);
  std::vector<Vector> v(n, Vector(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  double frobenius2 = 0.0;
  for (const auto& col : w) frobenius2 += squared_norm(col);
  // Columns this small are numerically zero; rotating them only churns noise.
  const double negligible = 1e-30 * frobenius2;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = squared_norm(w[p]);
        const double beta = squared_norm(w[q]);
        const double gamma = dot(w[p], w[q]);
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w[p][i], wq = w[q][i];
          w[p][i] = c * wp - s * wq;
          w[q][i] = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Vector norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = norm(w[j]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  Svd out{Vector(n), Matrix(m, n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = norms[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v[j][i];
    if (norms[j] > 0.0)
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = w[j][i] / norms[j];
  }
  return out;
}

/// Count of singular values above rel_tol * max(1, sigma_1).
inline std::size_t numerical_rank(std::span<const double> sigma, double rel_tol = 1e-9) {
  if (sigma.empty()) return 0;
  const double cutoff = rel_tol * std::max(1.0, sigma.front());
  return static_cast<std::size_t>(
      std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cutoff; }));
}

}  // namespace relembed
