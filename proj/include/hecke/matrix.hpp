#pragma once

// Dense matrices over Z, Q, Z[i] and Q(i), plus exact elimination over fields.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "hecke/gauss.hpp"

namespace hecke {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error(ErrorCode::kInvalidArgument, "matrix data size mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t k = 0; k < n; ++k) m(k, k) = T(1);
    return m;
  }
  static Matrix diagonal(const std::vector<T>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t k = 0; k < d.size(); ++k) m(k, k) = d[k];
    return m;
  }
  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_) throw Error(ErrorCode::kInvalidArgument, "ragged rows");
      for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
    }
    return m;
  }
  static Matrix from_columns(const std::vector<std::vector<T>>& cols) {
    if (cols.empty()) return {};
    Matrix m(cols[0].size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c].size() != m.rows_) throw Error(ErrorCode::kInvalidArgument, "ragged columns");
      for (std::size_t r = 0; r < m.rows_; ++r) m(r, c) = cols[c][r];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<T> column(std::size_t c) const {
    std::vector<T> v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
  }
  std::vector<T> row(std::size_t r) const {
    return std::vector<T>(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
  }
  const std::vector<T>& data() const { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
  }
  void swap_cols(std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
  }
  /// row[dst] += f * row[src]
  void add_row(std::size_t dst, std::size_t src, const T& f) {
    for (std::size_t c = 0; c < cols_; ++c) (*this)(dst, c) += f * (*this)(src, c);
  }
  /// col[dst] += col[src] * f
  void add_col(std::size_t dst, std::size_t src, const T& f) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, dst) += (*this)(r, src) * f;
  }
  void scale_row(std::size_t r, const T& f) {
    for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = f * (*this)(r, c);
  }

  Matrix& operator+=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::kInvalidArgument, "matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == T(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend Matrix operator*(const T& s, Matrix a) {
    for (auto& e : a.data_) e = s * e;
    return a;
  }
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::kInvalidArgument, "matrix shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using GaussIntMatrix = Matrix<GaussInt>;
using GaussRatMatrix = Matrix<GaussRational>;
using RationalMatrix = Matrix<Rational>;
using RationalVector = std::vector<Rational>;

// Conjugation helpers; identity on Rational.
inline const Rational& conj_of(const Rational& r) { return r; }
inline GaussRational conj_of(const GaussRational& z) { return z.conj(); }
inline GaussInt conj_of(const GaussInt& z) { return z.conj(); }
inline bool is_zero_of(const Rational& r) { return r == 0; }
inline bool is_zero_of(const GaussRational& z) { return z.is_zero(); }
inline bool is_zero_of(const GaussInt& z) { return z.is_zero(); }

template <class T>
Matrix<T> adjoint(const Matrix<T>& m) {
  Matrix<T> t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = conj_of(m(r, c));
  return t;
}

GaussRatMatrix to_rational(const GaussIntMatrix& m);
/// Entries must be integral.
GaussIntMatrix to_integral(const GaussRatMatrix& m);
bool is_integral(const GaussRatMatrix& m);

GaussRatVector to_rational(const GaussVector& v);
/// x^* A y.
GaussRational sesquilinear(const GaussRatVector& x, const GaussRatMatrix& a, const GaussRatVector& y);
GaussRational sesquilinear(const GaussVector& x, const GaussRatMatrix& a, const GaussVector& y);

// ---- exact elimination over a field (Rational or GaussRational)

template <class F>
F determinant(Matrix<F> m) {
  if (!m.is_square()) throw Error(ErrorCode::kInvalidArgument, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  F det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && is_zero_of(m(piv, c))) ++piv;
    if (piv == n) return F(0);
    if (piv != c) {
      m.swap_rows(piv, c);
      det = -det;
    }
    det *= m(c, c);
    const F inv = F(1) / m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      if (is_zero_of(m(r, c))) continue;
      m.add_row(r, c, -(m(r, c) * inv));
    }
  }
  return det;
}

template <class F>
std::optional<Matrix<F>> inverse(const Matrix<F>& m) {
  if (!m.is_square()) throw Error(ErrorCode::kInvalidArgument, "inverse of non-square matrix");
  const std::size_t n = m.rows();
  Matrix<F> a = m, inv = Matrix<F>::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && is_zero_of(a(piv, c))) ++piv;
    if (piv == n) return std::nullopt;
    a.swap_rows(piv, c);
    inv.swap_rows(piv, c);
    const F s = F(1) / a(c, c);
    a.scale_row(c, s);
    inv.scale_row(c, s);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || is_zero_of(a(r, c))) continue;
      const F f = -a(r, c);
      a.add_row(r, c, f);
      inv.add_row(r, c, f);
    }
  }
  return inv;
}

/// Reduced row echelon form in place; returns pivot columns.
template <class F>
std::vector<std::size_t> rref(Matrix<F>& a) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t c = 0; c < a.cols() && row < a.rows(); ++c) {
    std::size_t piv = row;
    while (piv < a.rows() && is_zero_of(a(piv, c))) ++piv;
    if (piv == a.rows()) continue;
    a.swap_rows(piv, row);
    a.scale_row(row, F(1) / a(row, c));
    for (std::size_t r = 0; r < a.rows(); ++r) {
      if (r == row || is_zero_of(a(r, c))) continue;
      a.add_row(r, row, -a(r, c));
    }
    pivots.push_back(c);
    ++row;
  }
  return pivots;
}

/// Basis of {x : a x = 0}, one vector per free column (free coordinate = 1).
template <class F>
std::vector<std::vector<F>> nullspace(Matrix<F> a) {
  const auto pivots = rref(a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::vector<F>> basis;
  for (std::size_t free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<F> v(a.cols(), F(0));
    v[free] = F(1);
    for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -a(k, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

template <class F>
std::size_t rank(Matrix<F> a) {
  return rref(a).size();
}

/// Solves a x = b for square nonsingular a.
template <class F>
std::vector<F> solve(const Matrix<F>& a, const std::vector<F>& b) {
  auto inv = inverse(a);
  if (!inv) throw Error(ErrorCode::kSingularMatrix, "solve with singular matrix");
  std::vector<F> x(a.rows(), F(0));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) x[r] += (*inv)(r, c) * b[c];
  return x;
}

}  // namespace hecke
