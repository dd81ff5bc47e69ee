#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "jetsym/error.hpp"
#include "jetsym/expr.hpp"
#include "jetsym/jet_space.hpp"
#include "jetsym/matrix.hpp"
#include "jetsym/oracle.hpp"

namespace testing_support {

using namespace jetsym;

// Random expression over the given symbols, depth-limited. Domain-unsafe
// subtrees are allowed; the oracle resamples around them.
class ExprGen {
 public:
  ExprGen(std::vector<Expr> leaves, std::uint64_t seed) : leaves_(std::move(leaves)), rng_(seed) {}

  Expr operator()(int depth) {
    if (depth <= 0 || pick(4) == 0) return leaf();
    switch (pick(8)) {
      case 0: return (*this)(depth - 1) + (*this)(depth - 1);
      case 1: return (*this)(depth - 1) * (*this)(depth - 1);
      case 2: return (*this)(depth - 1) - leaf();
      case 3: return (*this)(depth - 1) / (Expr(2) + pow(leaf(), Rational(2)));
      case 4: return pow((*this)(depth - 1), Rational(static_cast<std::int64_t>(pick(3)) + 2));
      case 5: return sin((*this)(depth - 1));
      case 6: return exp(Rational(1, 4) * (*this)(depth - 1));
      default: return cos(leaf()) * (*this)(depth - 1);
    }
  }

  Expr polynomial(int degree) {
    Expr r = Expr(Rational(static_cast<std::int64_t>(pick(5)) - 2));
    for (int t = 0; t < 4; ++t) {
      Expr m = Expr(Rational(static_cast<std::int64_t>(pick(7)) - 3, 1 + static_cast<std::int64_t>(pick(2))));
      int d = pick(degree + 1);
      for (int k = 0; k < d; ++k) m = m * leaves_[static_cast<std::size_t>(pick(static_cast<int>(leaves_.size())))];
      r = r + m;
    }
    return r;
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  Expr leaf() {
    if (pick(3) == 0) return Expr(Rational(static_cast<std::int64_t>(pick(7)) - 3, 1 + static_cast<std::int64_t>(pick(3))));
    return leaves_[static_cast<std::size_t>(pick(static_cast<int>(leaves_.size())))];
  }

 private:
  std::vector<Expr> leaves_;
  std::mt19937_64 rng_;
};

// Rebuild bottom-up through the public constructors.
inline Expr rebuild(const Expr& e) {
  std::vector<Expr> ch;
  for (const auto& c : e.children()) ch.push_back(rebuild(c));
  switch (e.kind()) {
    case NodeKind::constant:
    case NodeKind::symbol: return e;
    case NodeKind::sum: return Expr::sum(ch);
    case NodeKind::product: return Expr::product(ch);
    case NodeKind::power: return Expr::power(ch.front(), e.exponent());
    case NodeKind::apply: return Expr::apply(e.func(), ch.front());
  }
  return e;
}

inline bool try_eval(const Expr& e, const EvalPoint& p, double& out) {
  try {
    out = evaluate(e, p);
    return std::isfinite(out);
  } catch (const Error&) {
    return false;
  }
}

// Central difference along one symbol.
inline bool central_difference(const Expr& e, EvalPoint p, SymbolId s, double h, double& out) {
  const double v = p.at(s);
  double fp = 0, fm = 0;
  p.set(s, v + h);
  if (!try_eval(e, p, fp)) return false;
  p.set(s, v - h);
  if (!try_eval(e, p, fm)) return false;
  out = (fp - fm) / (2 * h);
  return true;
}

inline EvalPoint random_point(const std::vector<SymbolId>& syms, ExprGen& g) {
  EvalPoint p;
  for (auto s : syms) p.set(s, g.uniform(-1.5, 1.5));
  return p;
}

}  // namespace testing_support

namespace testing_support {

// Invertible q x q matrix on the base: unit-lower-triangular times a
// diagonal of 1 + (linear)^2, times a constant matrix of determinant 1.
inline ExprMatrix random_gauge(ExprGen& g, std::size_t q) {
  ExprMatrix A(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < i; ++j) A(i, j) = g.polynomial(2);
    Expr l = g.polynomial(1);
    A(i, i) = Expr(1) + l * l;
  }
  ExprMatrix U = ExprMatrix::identity(q);
  for (std::size_t j = 1; j < q; ++j) U(0, j) = Expr(Rational(static_cast<std::int64_t>(g.pick(5)) - 2, 2));
  return A * U;
}

}  // namespace testing_support
