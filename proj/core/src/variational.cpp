#include "jetsym/variational.hpp"

#include <cmath>
#include <set>

#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/gauge.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

namespace {

void need_scalar_ode(const JetSpace& S, const char* what) {
  if (S.n() != 1 || S.m() != 1) throw Error(Errc::invalid_argument, std::string(what) + " needs x and a single u");
}

int lagrangian_order(const Expr& L, const JetSpace& S) { return std::max(S.order_of(L), 0); }

Expr nabla(const Expr& e, const Expr& lambda, const JetSpace& S) { return total_derivative(e, 0, S) + lambda * e; }

}  // namespace

std::vector<Expr> euler_lagrange(const Expr& L, const JetSpace& S) {
  const int n = lagrangian_order(L, S);
  std::vector<Expr> out;
  for (int a = 0; a < S.m(); ++a) {
    std::vector<Expr> terms;
    for (const auto& J : S.multi_indices_upto(n)) {
      Expr d = partial(L, S.coordinate(a, J));
      if (d.is_zero()) continue;
      Expr t = total_derivative(d, J, S);
      terms.push_back(J.order() % 2 ? -t : t);
    }
    out.push_back(Expr::sum(std::move(terms)));
  }
  return out;
}

Verdict is_total_derivative(const Expr& e, const JetSpace& S, const Oracle& oracle) {
  return oracle.all_zero(euler_lagrange(e, S));
}

Expr variational_residual(const VectorField& X, const Expr& L, const Expr& F, const JetSpace& S) {
  return variational_lambda_residual(X, Expr(0), L, F, S);
}

Verdict check_variational_symmetry(const VectorField& X, const Expr& L, const Expr& F, const JetSpace& S,
                                   const Oracle& oracle) {
  return oracle.zero(variational_residual(X, L, F, S));
}

Verdict variational_symmetry_exists(const VectorField& X, const Expr& L, const JetSpace& S, const Oracle& oracle) {
  need_scalar_ode(S, "variational symmetry");
  auto V = prolong_standard(X, lagrangian_order(L, S), S);
  return is_total_derivative(V.apply(L) + L * total_derivative(X.xi[0], 0, S), S, oracle);
}

Expr variational_lambda_residual(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                                 const JetSpace& S) {
  need_scalar_ode(S, "variational symmetry");
  X.check_shape(S);
  auto V = prolong_lambda(X, lambda, lagrangian_order(L, S), S);
  return V.apply(L) + L * nabla(X.xi[0], lambda, S) - nabla(F, lambda, S);
}

Verdict check_variational_lambda_symmetry(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                                          const JetSpace& S, const Oracle& oracle) {
  return oracle.zero(variational_lambda_residual(X, lambda, L, F, S));
}

Expr noether_identity_residual(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                               const JetSpace& S) {
  need_scalar_ode(S, "Noether identity");
  X.check_shape(S);
  auto V = prolong_lambda(X, lambda, lagrangian_order(L, S), S);
  Expr Q = X.phi[0] - S.u_order(0, 1) * X.xi[0];
  return V.apply(L) - Q * euler_lagrange(L, S)[0] - nabla(F, lambda, S);
}

Expr noether_flux(const VectorField& X, const Expr& lambda, const Expr& L, const JetSpace& S) {
  need_scalar_ode(S, "Noether flux");
  if (!X.is_vertical()) throw Error(Errc::non_vertical_input, "Noether flux needs a vertical field");
  const int n = lagrangian_order(L, S);
  // (D + lambda)^j Q
  std::vector<Expr> nq{X.phi[0]};
  for (int j = 1; j < n; ++j) nq.push_back(nabla(nq.back(), lambda, S));
  std::vector<Expr> terms;
  for (int k = 1; k <= n; ++k) {
    Expr Lk = partial(L, S.coordinate(0, MultiIndex{k}));
    if (Lk.is_zero()) continue;
    Expr dj = Lk;  // (-D)^j L_k
    for (int j = 0; j < k; ++j) {
      terms.push_back(dj * nq[static_cast<std::size_t>(k - 1 - j)]);
      if (j + 1 < k) dj = -total_derivative(dj, 0, S);
    }
  }
  return Expr::sum(std::move(terms));
}

Verdict verify_flux_identity(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& P, const JetSpace& S,
                       const Oracle& oracle) {
  need_scalar_ode(S, "flux identity");
  X.check_shape(S);
  Expr Q = X.phi[0] - S.u_order(0, 1) * X.xi[0];
  return oracle.zero(Q * euler_lagrange(L, S)[0] - nabla(P, lambda, S));
}

SolvablePair check_solvable_pair(const VectorField& X1, const Expr& lambda1, const VectorField& X2,
                                 const Expr& lambda2, int k, const JetSpace& S, const SolvablePairOptions& options) {
  need_scalar_ode(S, "solvable pair");
  const Oracle& oracle = options.oracle;
  JetField A = prolong_lambda(X1, lambda1, k, S).as_jet_field();
  JetField B = prolong_lambda(X2, lambda2, k, S).as_jet_field();
  JetField C = commutator(A, B);
  SolvablePair out;
  if (A.is_zero_structurally()) throw Error(Errc::invalid_argument, "first field is zero");

  std::set<SymbolId> keyset, varset;
  for (const auto* f : {&A, &C}) {
    for (const auto& [s, e] : f->components()) {
      keyset.insert(s);
      for (auto v : e.free_symbols()) varset.insert(v);
    }
  }
  const std::vector<SymbolId> keys(keyset.begin(), keyset.end());
  std::vector<Expr> flat;
  for (auto s : keys) flat.push_back(A.coefficient(s));
  for (auto s : keys) flat.push_back(C.coefficient(s));
  std::vector<Expr> basis = options.basis;
  if (basis.empty()) {
    std::vector<Expr> vars;
    for (auto v : varset) vars.push_back(Expr::symbol(v));
    basis = monomials(vars, 2);
  }
  const std::size_t K = keys.size();
  auto points = oracle.sample_points(flat, std::max<int>(options.points, static_cast<int>(3 * basis.size())));
  Program prog(flat);
  std::vector<double> in(prog.inputs().size()), val(flat.size());
  std::vector<EvalPoint> good;
  std::vector<double> hs;
  for (const auto& p : points) {
    for (std::size_t s = 0; s < in.size(); ++s) in[s] = p.at(prog.inputs()[s]);
    if (!prog.run(in, val)) continue;
    double aa = 0, ac = 0, cn = 0;
    for (std::size_t i = 0; i < K; ++i) {
      aa += val[i] * val[i];
      ac += val[i] * val[K + i];
      cn = std::max(cn, std::abs(val[K + i]));
    }
    if (aa < 1e-20) continue;
    const double h = ac / aa;
    for (std::size_t i = 0; i < K; ++i) {
      const double r = val[K + i] - h * val[i];
      if (std::abs(r) > 1e-7 * (1 + cn)) {
        out.failure = "coefficient along " + symbol_name(keys[i]) + " is not proportional";
        Witness w;
        for (const auto& [id, v] : p.values()) w.point[symbol_name(id)] = v;
        w.lhs = val[K + i];
        w.rhs = h * val[i];
        w.index = i;
        out.witness = w;
        out.certificate.holds = false;
        out.certificate.max_residual = std::abs(r) / (1 + cn);
        out.certificate.witness = w;
        return out;
      }
    }
    good.push_back(p);
    hs.push_back(h);
  }
  if (good.size() * 2 < points.size()) throw Error(Errc::degenerate_distribution, "first field vanishes at most samples");
  double hmax = 0;
  for (double h : hs) hmax = std::max(hmax, std::abs(h));
  std::optional<Expr> h = hmax < 1e-10 ? std::optional<Expr>(Expr(0)) : fit_function(good, hs, basis);
  if (!h) {
    out.failure = "no proportionality factor within the ansatz";
    out.certificate.holds = false;
    return out;
  }
  std::vector<ExprPair> pairs;
  for (auto s : keys) pairs.emplace_back(C.coefficient(s), *h * A.coefficient(s));
  out.certificate = oracle.all_equal(pairs);
  if (out.certificate.holds) {
    out.h = *h;
  } else {
    out.failure = "fitted factor does not certify";
    out.witness = out.certificate.witness;
  }
  return out;
}

DiffEq MuEulerLagrange::system() const {
  std::vector<SolvedEntry> entries;
  for (std::size_t a = 0; a < accelerations.size(); ++a)
    entries.push_back(SolvedEntry{static_cast<int>(a), MultiIndex{2}, accelerations[a]});
  return DiffEq(space, std::move(entries));
}

MuEulerLagrange mu_euler_lagrange(const Expr& L, const ExprMatrix& Lambda, const JetSpace& S, const Oracle& oracle) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "mu-Euler-Lagrange equations need one independent variable");
  const int m = S.m();
  if (Lambda.rows() != static_cast<std::size_t>(m) || !Lambda.is_square())
    throw Error(Errc::size_mismatch, "Lambda must be m x m");
  if (S.order_of(L) > 1) throw Error(Errc::invalid_argument, "Lagrangian must be first order");
  std::vector<Expr> pi;
  for (int a = 0; a < m; ++a) pi.push_back(partial(L, S.coordinate(a, MultiIndex{1})));
  MuEulerLagrange out{{}, {}, S};
  ExprMatrix H(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
  std::vector<Expr> rest;
  for (int a = 0; a < m; ++a) {
    std::vector<Expr> t{total_derivative(pi[static_cast<std::size_t>(a)], 0, S),
                        -partial(L, S.coordinate(a, MultiIndex{0}))};
    for (int b = 0; b < m; ++b) t.push_back(-Lambda(static_cast<std::size_t>(b), static_cast<std::size_t>(a)) * pi[static_cast<std::size_t>(b)]);
    Expr eqn = Expr::sum(std::move(t));
    out.equations.push_back(eqn);
    Bindings zero;
    for (int b = 0; b < m; ++b) {
      const SymbolId acc = S.coordinate(b, MultiIndex{2});
      H(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = partial(eqn, acc);
      zero[acc] = Expr(0);
    }
    rest.push_back(substitute(eqn, zero));
  }
  Expr det = determinant(H);
  if (det.is_zero() || oracle.zero(det).holds) throw Error(Errc::degenerate_lagrangian, "Hessian in the velocities is singular");
  try {
    check_invertible(H, oracle);
  } catch (const Error&) {
    throw Error(Errc::degenerate_lagrangian, "Hessian in the velocities is singular at a sample point");
  }
  ExprMatrix Hi = inverse(H);
  std::vector<Expr> neg;
  for (auto& r : rest) neg.push_back(-r);
  out.accelerations = Hi * neg;
  return out;
}

MuConservation check_mu_conservation(const Expr& L, const ExprMatrix& Lambda, const VectorField& X, const JetSpace& S,
                                     const Oracle& oracle) {
  X.check_shape(S);
  if (!X.is_vertical()) throw Error(Errc::non_vertical_input, "conservation check needs a vertical field");
  auto el = mu_euler_lagrange(L, Lambda, S, oracle);
  auto V = prolong_Lambda_ode(X, Lambda, 1, S);
  MuConservation out;
  out.hypothesis = oracle.zero(V.apply(L));
  std::vector<Expr> terms;
  for (int a = 0; a < S.m(); ++a)
    terms.push_back(X.phi[static_cast<std::size_t>(a)] * partial(L, S.coordinate(a, MultiIndex{1})));
  out.P = Expr::sum(std::move(terms));
  out.conservation = oracle.zero(restrict_to(total_derivative(out.P, 0, S), el.system()));
  return out;
}

}  // namespace jetsym
