#pragma once

#include <functional>
#include <vector>

#include "jetsym/expr.hpp"
#include "jetsym/jet_space.hpp"

namespace jetsym {

// Dense matrix of expressions, row-major.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  ExprMatrix(std::initializer_list<std::initializer_list<Expr>> rows);

  static ExprMatrix identity(std::size_t n);
  static ExprMatrix diagonal(const std::vector<Expr>& d);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Expr& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Expr& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<Expr>& entries() const noexcept { return data_; }

  ExprMatrix transpose() const;
  ExprMatrix map(const std::function<Expr(const Expr&)>& f) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Expr> data_;
};

ExprMatrix operator+(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator-(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator*(const ExprMatrix& a, const ExprMatrix& b);
ExprMatrix operator*(const Expr& s, const ExprMatrix& a);
std::vector<Expr> operator*(const ExprMatrix& a, const std::vector<Expr>& v);

// [A, B] = AB - BA
ExprMatrix bracket(const ExprMatrix& a, const ExprMatrix& b);

// Symbolic, q <= 3 only; larger sizes throw invalid_argument.
Expr determinant(const ExprMatrix& a);
ExprMatrix adjugate(const ExprMatrix& a);
ExprMatrix inverse(const ExprMatrix& a);

ExprMatrix total_derivative(const ExprMatrix& a, int i, const JetSpace& S);

// Pairs (a_ij, b_ij), for feeding the oracle.
std::vector<std::pair<Expr, Expr>> entry_pairs(const ExprMatrix& a, const ExprMatrix& b);

}  // namespace jetsym
