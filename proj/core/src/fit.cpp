#include "jetsym/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "jetsym/error.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

namespace {

Eigen::MatrixXd to_eigen(const DenseMatrix& A) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(A.rows), static_cast<Eigen::Index>(A.cols));
  for (std::size_t i = 0; i < A.rows; ++i) {
    for (std::size_t j = 0; j < A.cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A(i, j);
  }
  return M;
}

// Rows of B brought to reduced row-echelon form in place.
void rref(Eigen::MatrixXd& B) {
  const Eigen::Index rows = B.rows(), cols = B.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = r;
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      if (std::abs(B(i, c)) > std::abs(B(piv, c))) piv = i;
    }
    if (std::abs(B(piv, c)) < 1e-9) continue;
    B.row(piv).swap(B.row(r));
    B.row(r) /= B(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r) B.row(i) -= B(i, c) * B.row(r);
    }
    ++r;
  }
  // clean numerical dust
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::abs(B(i, j)) < 1e-12) B(i, j) = 0;
    }
  }
}

}  // namespace

NullSpace null_space(const DenseMatrix& A, double rel_threshold) {
  NullSpace out;
  const auto n = static_cast<Eigen::Index>(A.cols);
  if (n == 0) return out;
  Eigen::MatrixXd M = to_eigen(A);
  if (M.rows() < n) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(n, n);
    padded.topRows(M.rows()) = M;
    M = padded;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double rel = smax > 0 ? s(i) / smax : 0.0;
    if (smax > 0 && rel > rel_threshold) {
      ++rank;
      out.smallest_kept = rel;
    } else {
      out.largest_dropped = std::max(out.largest_dropped, rel);
    }
  }
  out.rank = rank;
  const Eigen::Index d = n - rank;
  if (d == 0) return out;
  Eigen::MatrixXd B = svd.matrixV().rightCols(d).transpose();
  rref(B);
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] = B(i, j);
    out.basis.push_back(std::move(v));
  }
  return out;
}

std::vector<double> least_squares(const DenseMatrix& A, const std::vector<double>& b, double* residual, int* rank) {
  Eigen::MatrixXd M = to_eigen(A);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < b.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  Eigen::VectorXd c = qr.solve(rhs);
  if (residual) *residual = (M * c - rhs).norm();
  if (rank) *rank = static_cast<int>(qr.rank());
  return std::vector<double>(c.data(), c.data() + c.size());
}

std::vector<Expr> monomials(const std::vector<Expr>& vars, int degree) {
  std::vector<Expr> out{Expr(1)};
  std::vector<Expr> level{Expr(1)};
  // level d built from level d-1 by multiplying with vars[i] for i >= last index used
  std::vector<std::size_t> last{0};
  for (int d = 1; d <= degree; ++d) {
    std::vector<Expr> next;
    std::vector<std::size_t> next_last;
    for (std::size_t t = 0; t < level.size(); ++t) {
      for (std::size_t i = last[t]; i < vars.size(); ++i) {
        next.push_back(level[t] * vars[i]);
        next_last.push_back(i);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
    last = std::move(next_last);
  }
  return out;
}

std::optional<Expr> rational_combination(const std::vector<double>& coeffs, const std::vector<Expr>& basis,
                                         std::int64_t max_den, double tol) {
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    auto r = Rational::approximate(coeffs[i], max_den, tol);
    if (!r) return std::nullopt;
    if (!r->is_zero()) terms.push_back(Expr(*r) * basis[i]);
  }
  return Expr::sum(std::move(terms));
}

std::optional<Expr> fit_function(const std::vector<EvalPoint>& points, const std::vector<double>& values,
                                 const std::vector<Expr>& basis) {
  const std::size_t p = points.size(), nb = basis.size();
  if (p == 0 || nb == 0) return std::nullopt;
  Program prog(basis);
  std::vector<double> in(prog.inputs().size()), out(nb);
  DenseMatrix B(p, nb);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t s = 0; s < in.size(); ++s) in[s] = points[r].at(prog.inputs()[s]);
    if (!prog.run(in, out)) return std::nullopt;
    for (std::size_t j = 0; j < nb; ++j) B(r, j) = out[j];
  }
  double vnorm = 0;
  for (double v : values) vnorm = std::max(vnorm, std::abs(v));
  // polynomial ansatz
  if (p >= nb) {
    double res = 0;
    int rank = 0;
    auto c = least_squares(B, values, &res, &rank);
    if (res <= 1e-8 * (1 + vnorm) * std::sqrt(static_cast<double>(p))) {
      if (auto e = rational_combination(c, basis, 1000, 1e-7)) return e;
    }
  }
  // rational ansatz P/Q: sum p_j b_j - v sum q_j b_j = 0
  if (p >= 2 * nb) {
    DenseMatrix M(p, 2 * nb);
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t j = 0; j < nb; ++j) {
        M(r, j) = B(r, j);
        M(r, nb + j) = -values[r] * B(r, j);
      }
    }
    auto ns = null_space(M, 1e-10);
    for (auto it = ns.basis.rbegin(); it != ns.basis.rend(); ++it) {
      std::vector<double> pc(it->begin(), it->begin() + static_cast<std::ptrdiff_t>(nb));
      std::vector<double> qc(it->begin() + static_cast<std::ptrdiff_t>(nb), it->end());
      // normalize by the largest denominator coefficient
      double scale = 0;
      for (double q : qc) {
        if (std::abs(q) > std::abs(scale)) scale = q;
      }
      if (std::abs(scale) < 1e-9) continue;
      for (auto& v : pc) v /= scale;
      for (auto& v : qc) v /= scale;
      auto P = rational_combination(pc, basis, 1000, 1e-7);
      auto Q = rational_combination(qc, basis, 1000, 1e-7);
      if (P && Q && !Q->is_zero()) return *P / *Q;
    }
  }
  return std::nullopt;
}

}  // namespace jetsym
