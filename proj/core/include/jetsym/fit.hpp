#pragma once

#include <optional>
#include <vector>

#include "jetsym/expr.hpp"
#include "jetsym/oracle.hpp"

namespace jetsym {

// Row-major dense matrix of doubles; kept free of any linear-algebra
// library in the public interface.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct NullSpace {
  // Basis vectors in reduced row-echelon form (pivot entries 1).
  std::vector<std::vector<double>> basis;
  int rank = 0;
  // Largest discarded and smallest kept singular values, relative to the
  // largest one; a narrow gap means the rank decision is fragile.
  double largest_dropped = 0;
  double smallest_kept = 1;
};

// Right null space via SVD, threshold relative to the largest singular value.
NullSpace null_space(const DenseMatrix& A, double rel_threshold = 1e-8);

// Least squares min |A c - b|; returns c and the residual norm.
std::vector<double> least_squares(const DenseMatrix& A, const std::vector<double>& b, double* residual = nullptr,
                                  int* rank = nullptr);

// Monomials of total degree <= degree in vars, constant first.
std::vector<Expr> monomials(const std::vector<Expr>& vars, int degree);

// Linear combination with coefficients rationalized (denominator <=
// max_den within tol); returns nullopt when any coefficient is not close to
// a small rational.
std::optional<Expr> rational_combination(const std::vector<double>& coeffs, const std::vector<Expr>& basis,
                                         std::int64_t max_den, double tol);

// Fits f with f(p) ~ values[p] from a polynomial ansatz over `basis`, then a
// rational P/Q ansatz with both P and Q in the span of `basis`. Returns the
// first candidate whose coefficients rationalize; the caller certifies.
std::optional<Expr> fit_function(const std::vector<EvalPoint>& points, const std::vector<double>& values,
                                 const std::vector<Expr>& basis);

}  // namespace jetsym
