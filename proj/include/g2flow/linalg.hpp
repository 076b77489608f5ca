#pragma once

// Small dense linear algebra over either scalar kind. Exact kind pivots on the
// first nonzero entry; float kind uses partial pivoting.

#include <cmath>
#include <cstddef>
#include <vector>

#include "g2flow/errors.hpp"
#include "g2flow/scalar.hpp"

namespace g2 {

template <ScalarKind S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, S(0)) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
  const S& operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * cols_ + j];
  }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.cols_ != y.rows_) throw RankError("matrix shape mismatch");
    Matrix out(x.rows_, y.cols_);
    for (int i = 0; i < x.rows_; ++i)
      for (int k = 0; k < x.cols_; ++k) {
        if (is_zero(x(i, k))) continue;
        for (int j = 0; j < y.cols_; ++j) out(i, j) += x(i, k) * y(k, j);
      }
    return out;
  }
  friend Matrix operator+(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] += y.a_[i];
    return x;
  }
  friend Matrix operator-(Matrix x, const Matrix& y) {
    for (std::size_t i = 0; i < x.a_.size(); ++i) x.a_[i] -= y.a_[i];
    return x;
  }
  friend Matrix operator*(const S& s, Matrix x) {
    for (auto& v : x.a_) v *= s;
    return x;
  }
  bool operator==(const Matrix& o) const = default;

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  S trace() const {
    S t(0);
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& v : a_) m = std::max(m, std::abs(to_double(v)));
    return m;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<S> a_;
};

namespace detail {

template <ScalarKind S>
bool negligible(const S& x, double tol) {
  if constexpr (is_exact_v<S>)
    return is_zero(x);
  else
    return std::abs(x) <= tol;
}

// Index of the pivot row in column c among rows r.., or -1.
template <ScalarKind S>
int choose_pivot(const Matrix<S>& m, int r, int c, double tol) {
  int best = -1;
  double best_abs = 0;
  for (int i = r; i < m.rows(); ++i) {
    if (negligible(m(i, c), tol)) continue;
    if constexpr (is_exact_v<S>) return i;
    const double v = std::abs(to_double(m(i, c)));
    if (v > best_abs) {
      best_abs = v;
      best = i;
    }
  }
  return best;
}

template <ScalarKind S>
void swap_rows(Matrix<S>& m, int a, int b) {
  if (a == b) return;
  for (int j = 0; j < m.cols(); ++j) std::swap(m(a, j), m(b, j));
}

}  // namespace detail

// Reduced row echelon form in place; returns the rank.
template <ScalarKind S>
int row_reduce(Matrix<S>& m, double tol = 1e-10, std::vector<int>* pivots = nullptr) {
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    const int p = detail::choose_pivot(m, r, c, tol);
    if (p < 0) continue;
    detail::swap_rows(m, r, p);
    const S inv = S(1) / m(r, c);
    for (int j = c; j < m.cols(); ++j) m(r, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || detail::negligible(m(i, c), 0.0)) continue;
      const S f = m(i, c);
      for (int j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    if (pivots) pivots->push_back(c);
    ++r;
  }
  return r;
}

template <ScalarKind S>
int rank(Matrix<S> m, double tol = 1e-10) {
  return row_reduce(m, tol);
}

// Basis of the null space (columns of the returned matrix).
template <ScalarKind S>
Matrix<S> null_space(Matrix<S> m, double tol = 1e-10) {
  std::vector<int> piv;
  const int r = row_reduce(m, tol, &piv);
  std::vector<bool> is_piv(m.cols(), false);
  for (int c : piv) is_piv[c] = true;
  Matrix<S> basis(m.cols(), m.cols() - r);
  int k = 0;
  for (int free = 0; free < m.cols(); ++free) {
    if (is_piv[free]) continue;
    basis(free, k) = S(1);
    for (int i = 0; i < r; ++i) basis(piv[i], k) = -m(i, free);
    ++k;
  }
  return basis;
}

// LU factorization with row pivoting, reusable for many right-hand sides.
template <ScalarKind S>
class LuSolver {
 public:
  explicit LuSolver(Matrix<S> a, double tol = 1e-13) : lu_(std::move(a)) {
    const int n = lu_.rows();
    if (lu_.cols() != n) throw RankError("LU needs a square matrix");
    perm_.resize(n);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    double scale = std::max(lu_.max_abs(), 1.0);
    for (int c = 0; c < n; ++c) {
      const int p = detail::choose_pivot(lu_, c, c, tol * scale);
      if (p < 0) throw SingularMatrix("singular matrix in LU factorization");
      detail::swap_rows(lu_, c, p);
      std::swap(perm_[c], perm_[p]);
      if (p != c) sign_ = -sign_;
      for (int i = c + 1; i < n; ++i) {
        if (detail::negligible(lu_(i, c), 0.0)) continue;
        lu_(i, c) /= lu_(c, c);
        const S f = lu_(i, c);
        for (int j = c + 1; j < n; ++j) lu_(i, j) -= f * lu_(c, j);
      }
    }
  }

  std::vector<S> solve(const std::vector<S>& b) const {
    const int n = lu_.rows();
    std::vector<S> x(n);
    for (int i = 0; i < n; ++i) {
      S acc = b[perm_[i]];
      for (int j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
      S acc = x[i];
      for (int j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

  S determinant() const {
    S d(sign_);
    for (int i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
  }

 private:
  Matrix<S> lu_;
  std::vector<int> perm_;
  int sign_ = 1;
};

template <ScalarKind S>
Matrix<S> inverse(const Matrix<S>& a) {
  LuSolver<S> lu(a);
  const int n = a.rows();
  Matrix<S> inv(n, n);
  std::vector<S> e(n, S(0));
  for (int j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), S(0));
    e[j] = S(1);
    auto col = lu.solve(e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

template <ScalarKind S>
S determinant(const Matrix<S>& a) {
  try {
    return LuSolver<S>(a, 0.0).determinant();
  } catch (const SingularMatrix&) {
    return S(0);
  }
}

// LDL^T pivots of a symmetric matrix without pivoting; all positive iff the
// matrix is positive definite (equivalently, all leading minors positive).
template <ScalarKind S>
bool is_positive_definite(const Matrix<S>& a, double tol = 0.0) {
  const int n = a.rows();
  Matrix<S> m = a;
  for (int k = 0; k < n; ++k) {
    if constexpr (is_exact_v<S>) {
      if (sgn(m(k, k)) <= 0) return false;
    } else {
      if (!(m(k, k) > tol)) return false;
    }
    for (int i = k + 1; i < n; ++i) {
      const S f = m(i, k) / m(k, k);
      for (int j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return true;
}

// Eigenvalues of a symmetric float matrix, ascending.
std::vector<double> symmetric_eigenvalues(const Matrix<double>& a);

}  // namespace g2
