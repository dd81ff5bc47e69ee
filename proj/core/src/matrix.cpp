#include "jetsym/matrix.hpp"

#include "jetsym/error.hpp"

namespace jetsym {

ExprMatrix::ExprMatrix(std::initializer_list<std::initializer_list<Expr>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(Errc::size_mismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

ExprMatrix ExprMatrix::identity(std::size_t n) {
  ExprMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Expr(1);
  return m;
}

ExprMatrix ExprMatrix::diagonal(const std::vector<Expr>& d) {
  ExprMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

ExprMatrix ExprMatrix::transpose() const {
  ExprMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

ExprMatrix ExprMatrix::map(const std::function<Expr(const Expr&)>& f) const {
  ExprMatrix r(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = f(data_[i]);
  return r;
}

namespace {

void same_shape(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::size_mismatch, "matrix shapes differ");
  }
}

}  // namespace

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b) {
  same_shape(a, b);
  ExprMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  }
  return r;
}

ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b) {
  same_shape(a, b);
  ExprMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  }
  return r;
}

ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b) {
  if (a.cols() != b.rows()) throw Error(Errc::size_mismatch, "matrix product shapes differ");
  ExprMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < a.cols(); ++k) {
        if (a(i, k).is_zero() || b(k, j).is_zero()) continue;
        terms.push_back(a(i, k) * b(k, j));
      }
      r(i, j) = Expr::sum(std::move(terms));
    }
  }
  return r;
}

ExprMatrix operator*(const Expr& s, const ExprMatrix& a) {
  return a.map([&](const Expr& e) { return s * e; });
}

std::vector<Expr> operator*(const ExprMatrix& a, const std::vector<Expr>& v) {
  if (a.cols() != v.size()) throw Error(Errc::size_mismatch, "matrix-vector shapes differ");
  std::vector<Expr> r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::vector<Expr> terms;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (!a(i, k).is_zero() && !v[k].is_zero()) terms.push_back(a(i, k) * v[k]);
    }
    r[i] = Expr::sum(std::move(terms));
  }
  return r;
}

ExprMatrix bracket(const ExprMatrix& a, const ExprMatrix& b) { return a * b - b * a; }

Expr determinant(const ExprMatrix& a) {
  if (!a.is_square()) throw Error(Errc::size_mismatch, "determinant of a non-square matrix");
  switch (a.rows()) {
    case 0: return Expr(1);
    case 1: return a(0, 0);
    case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      throw Error(Errc::invalid_argument, "symbolic determinant limited to size <= 3");
  }
}

ExprMatrix adjugate(const ExprMatrix& a) {
  if (!a.is_square()) throw Error(Errc::size_mismatch, "adjugate of a non-square matrix");
  const std::size_t n = a.rows();
  if (n > 3) throw Error(Errc::invalid_argument, "symbolic inverse limited to size <= 3");
  if (n == 1) return ExprMatrix{{Expr(1)}};
  ExprMatrix adj(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      ExprMatrix minor(n - 1, n - 1);
      for (std::size_t r = 0, mr = 0; r < n; ++r) {
        if (r == i) continue;
        for (std::size_t c = 0, mc = 0; c < n; ++c) {
          if (c == j) continue;
          minor(mr, mc++) = a(r, c);
        }
        ++mr;
      }
      Expr cof = determinant(minor);
      adj(j, i) = ((i + j) % 2 == 0) ? cof : -cof;
    }
  }
  return adj;
}

ExprMatrix inverse(const ExprMatrix& a) {
  Expr det = determinant(a);
  if (det.is_zero()) throw Error(Errc::singular_at_sample, "matrix is identically singular");
  Expr inv = pow(det, Rational(-1));
  return inv * adjugate(a);
}

ExprMatrix total_derivative(const ExprMatrix& a, int i, const JetSpace& S) {
  return a.map([&](const Expr& e) { return total_derivative(e, i, S); });
}

std::vector<std::pair<Expr, Expr>> entry_pairs(const ExprMatrix& a, const ExprMatrix& b) {
  same_shape(a, b);
  std::vector<std::pair<Expr, Expr>> out;
  for (std::size_t i = 0; i < a.entries().size(); ++i) out.emplace_back(a.entries()[i], b.entries()[i]);
  return out;
}

}  // namespace jetsym
