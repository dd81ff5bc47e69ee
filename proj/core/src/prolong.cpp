#include "jetsym/prolong.hpp"

#include <cmath>

#include "jetsym/error.hpp"

namespace jetsym {

namespace {

void check_order(int k, const JetSpace& S) {
  if (k < 0) throw Error(Errc::invalid_argument, "prolongation order must be >= 0");
  if (k > S.max_order()) {
    throw Error(Errc::order_overflow, "prolongation order " + std::to_string(k) + " exceeds max_order " +
                                          std::to_string(S.max_order()));
  }
}

void check_first_order(const Expr& e, const JetSpace& S, const char* what) {
  if (S.order_of(e) > 1) {
    throw Error(Errc::invalid_twist, std::string(what) + " depends on derivatives of order >= 2: " + e.str());
  }
}

void check_mu_shape(const MuTwist& mu, const JetSpace& S) {
  if (mu.Lambda.size() != static_cast<std::size_t>(S.n())) {
    throw Error(Errc::size_mismatch, "mu twist needs one matrix per independent variable");
  }
  for (const auto& L : mu.Lambda) {
    if (L.rows() != static_cast<std::size_t>(S.m()) || L.cols() != static_cast<std::size_t>(S.m())) {
      throw Error(Errc::size_mismatch, "mu twist matrices must be m x m");
    }
  }
}

Expr u_at(const JetSpace& S, int a, const MultiIndex& J) { return S.u(a, J); }

// One step of the mu recursion from the table at P to P + e_i.
std::vector<Expr> mu_step(const std::vector<Expr>& psiP, const MultiIndex& P, int i, const VectorField& X,
                          const std::vector<std::vector<Expr>>& Dxi, const ExprMatrix* Lambda,
                          const JetSpace& S) {
  const int n = S.n();
  const int m = S.m();
  std::vector<Expr> out(static_cast<std::size_t>(m));
  // psi^b_P - u^b_{P,l} xi^l, needed only when twisted
  std::vector<Expr> reduced;
  if (Lambda) {
    reduced.resize(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b) {
      std::vector<Expr> terms{psiP[static_cast<std::size_t>(b)]};
      for (int l = 0; l < n; ++l) {
        const Expr& xl = X.xi[static_cast<std::size_t>(l)];
        if (!xl.is_zero()) terms.push_back(-(u_at(S, b, P.plus(static_cast<std::size_t>(l))) * xl));
      }
      reduced[static_cast<std::size_t>(b)] = Expr::sum(std::move(terms));
    }
  }
  for (int a = 0; a < m; ++a) {
    std::vector<Expr> terms{total_derivative(psiP[static_cast<std::size_t>(a)], i, S)};
    for (int l = 0; l < n; ++l) {
      const Expr& d = Dxi[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
      if (!d.is_zero()) terms.push_back(-(u_at(S, a, P.plus(static_cast<std::size_t>(l))) * d));
    }
    if (Lambda) {
      for (int b = 0; b < m; ++b) {
        const Expr& c = (*Lambda)(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        if (!c.is_zero()) terms.push_back(c * reduced[static_cast<std::size_t>(b)]);
      }
    }
    out[static_cast<std::size_t>(a)] = Expr::sum(std::move(terms));
  }
  return out;
}

std::vector<std::vector<Expr>> total_derivatives_of_xi(const VectorField& X, const JetSpace& S) {
  std::vector<std::vector<Expr>> D(static_cast<std::size_t>(S.n()));
  for (int i = 0; i < S.n(); ++i) {
    for (int l = 0; l < S.n(); ++l) D[static_cast<std::size_t>(i)].push_back(total_derivative(X.xi[static_cast<std::size_t>(l)], i, S));
  }
  return D;
}

// Shared driver for the standard and mu recursions along canonical paths.
ProlongedField prolong_paths(const VectorField& X, const MuTwist* mu, int k, const JetSpace& S,
                             TwistKind tag) {
  X.check_shape(S);
  check_order(k, S);
  ProlongedField V(X, k, tag, S);
  if (k == 0) return V;
  auto Dxi = total_derivatives_of_xi(X, S);
  for (const auto& J : S.multi_indices_upto(k)) {
    if (J.is_zero()) continue;
    const int i = J.last_direction();
    const MultiIndex P = *J.minus(static_cast<std::size_t>(i));
    std::vector<Expr> psiP;
    for (int a = 0; a < S.m(); ++a) psiP.push_back(V.psi(a, P));
    auto next = mu_step(psiP, P, i, X, Dxi, mu ? &mu->Lambda[static_cast<std::size_t>(i)] : nullptr, S);
    for (int a = 0; a < S.m(); ++a) V.set_psi(a, J, next[static_cast<std::size_t>(a)]);
  }
  return V;
}

}  // namespace

void check_twist_domain(const TwistData& twist, const JetSpace& S) {
  if (auto* l = std::get_if<LambdaTwist>(&twist)) {
    check_first_order(l->lambda, S, "lambda");
  } else if (auto* mu = std::get_if<MuTwist>(&twist)) {
    for (const auto& L : mu->Lambda) {
      for (const auto& e : L.entries()) check_first_order(e, S, "mu entry");
    }
  } else if (auto* s = std::get_if<SigmaTwist>(&twist)) {
    for (const auto& e : s->sigma.entries()) check_first_order(e, S, "sigma entry");
  }
}

ProlongedField prolong_standard(const VectorField& X, int k, const JetSpace& S) {
  if (S.n() != 1) return prolong_paths(X, nullptr, k, S, TwistKind::standard);
  // one independent variable: psi_(j+1) = D_x psi_(j) - u_(j+1) D_x xi
  X.check_shape(S);
  check_order(k, S);
  ProlongedField V(X, k, TwistKind::standard, S);
  const Expr Dxi = k > 0 ? total_derivative(X.xi[0], 0, S) : Expr();
  for (int a = 0; a < S.m(); ++a) {
    Expr prev = X.phi[static_cast<std::size_t>(a)];
    for (int j = 0; j < k; ++j) {
      Expr next = total_derivative(prev, 0, S);
      if (!Dxi.is_zero()) next -= S.u(a, MultiIndex{j + 1}) * Dxi;
      V.set_psi(a, MultiIndex{j + 1}, next);
      prev = next;
    }
  }
  return V;
}

ProlongedField prolong_lambda(const VectorField& X, const Expr& lambda, int k, const JetSpace& S) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "lambda-prolongation needs one independent variable");
  X.check_shape(S);
  check_order(k, S);
  check_first_order(lambda, S, "lambda");
  ProlongedField V(X, k, TwistKind::lambda, S);
  if (k == 0) return V;
  // (D_x + lambda) xi
  const Expr nabla_xi = total_derivative(X.xi[0], 0, S) + lambda * X.xi[0];
  for (int a = 0; a < S.m(); ++a) {
    Expr prev = X.phi[static_cast<std::size_t>(a)];
    for (int j = 0; j < k; ++j) {
      Expr next = total_derivative(prev, 0, S) + lambda * prev;
      if (!nabla_xi.is_zero()) next -= S.u(a, MultiIndex{j + 1}) * nabla_xi;
      V.set_psi(a, MultiIndex{j + 1}, next);
      prev = next;
    }
  }
  return V;
}

std::vector<ExprMatrix> check_mch(const MuTwist& mu, const JetSpace& S) {
  check_mu_shape(mu, S);
  std::vector<ExprMatrix> out;
  for (int i = 0; i < S.n(); ++i) {
    for (int j = i + 1; j < S.n(); ++j) {
      const auto& Li = mu.Lambda[static_cast<std::size_t>(i)];
      const auto& Lj = mu.Lambda[static_cast<std::size_t>(j)];
      out.push_back(total_derivative(Lj, i, S) - total_derivative(Li, j, S) + bracket(Li, Lj));
    }
  }
  return out;
}

Verdict mch_verdict(const MuTwist& mu, const JetSpace& S, const Oracle& oracle) {
  std::vector<Expr> entries;
  for (const auto& R : check_mch(mu, S)) entries.insert(entries.end(), R.entries().begin(), R.entries().end());
  return oracle.all_zero(entries);
}

ProlongedField prolong_mu(const VectorField& X, const MuTwist& mu, int k, const JetSpace& S,
                          const MuOptions& options) {
  check_mu_shape(mu, S);
  for (const auto& L : mu.Lambda) {
    for (const auto& e : L.entries()) check_first_order(e, S, "mu entry");
  }
  if (!options.unchecked && S.n() > 1) {
    Verdict v = mch_verdict(mu, S, options.oracle);
    if (!v.holds) {
      throw Error(Errc::mch_violation, "the mu twist violates the horizontal Maurer-Cartan condition (max residual " +
                                           std::to_string(v.max_residual) + ")");
    }
  }
  return prolong_paths(X, &mu, k, S, TwistKind::mu);
}

std::vector<Expr> prolong_mu_along_path(const VectorField& X, const MuTwist& mu, const std::vector<int>& path,
                                        const JetSpace& S) {
  check_mu_shape(mu, S);
  X.check_shape(S);
  auto Dxi = total_derivatives_of_xi(X, S);
  MultiIndex P(static_cast<std::size_t>(S.n()));
  std::vector<Expr> psi = X.phi;
  for (int i : path) {
    if (i < 0 || i >= S.n()) throw Error(Errc::invalid_argument, "path direction out of range");
    psi = mu_step(psi, P, i, X, Dxi, &mu.Lambda[static_cast<std::size_t>(i)], S);
    P = P.plus(static_cast<std::size_t>(i));
  }
  return psi;
}

ProlongedField prolong_Lambda_ode(const VectorField& X, const ExprMatrix& Lambda, int k, const JetSpace& S) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "Lambda-prolongation needs one independent variable");
  return prolong_mu(X, MuTwist{{Lambda}}, k, S);
}

std::vector<ProlongedField> prolong_sigma(const std::vector<VectorField>& Xs, const ExprMatrix& sigma, int k,
                                          const JetSpace& S) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "sigma-prolongation needs one independent variable");
  const std::size_t r = Xs.size();
  if (sigma.rows() != r || sigma.cols() != r) {
    throw Error(Errc::size_mismatch, "sigma is " + std::to_string(sigma.rows()) + "x" +
                                         std::to_string(sigma.cols()) + " but there are " + std::to_string(r) +
                                         " fields");
  }
  for (const auto& e : sigma.entries()) check_first_order(e, S, "sigma entry");
  check_order(k, S);
  for (const auto& X : Xs) X.check_shape(S);
  std::vector<ProlongedField> out;
  for (const auto& X : Xs) out.emplace_back(X, k, TwistKind::sigma, S);
  std::vector<Expr> Dxi;
  for (const auto& X : Xs) Dxi.push_back(k > 0 ? total_derivative(X.xi[0], 0, S) : Expr());
  for (int a = 0; a < S.m(); ++a) {
    for (int j = 0; j < k; ++j) {
      const MultiIndex Jp{j}, Jn{j + 1};
      const Expr u_next = S.u(a, Jn);
      // (psi^a_j)_beta - u^a_{j+1} xi_beta
      std::vector<Expr> reduced;
      for (std::size_t b = 0; b < r; ++b) reduced.push_back(out[b].psi(a, Jp) - u_next * Xs[b].xi[0]);
      std::vector<Expr> next;
      for (std::size_t al = 0; al < r; ++al) {
        std::vector<Expr> terms{total_derivative(out[al].psi(a, Jp), 0, S)};
        if (!Dxi[al].is_zero()) terms.push_back(-(u_next * Dxi[al]));
        for (std::size_t b = 0; b < r; ++b) {
          if (!sigma(al, b).is_zero()) terms.push_back(sigma(al, b) * reduced[b]);
        }
        next.push_back(Expr::sum(std::move(terms)));
      }
      for (std::size_t al = 0; al < r; ++al) out[al].set_psi(a, Jn, next[al]);
    }
  }
  return out;
}

VectorField evolutionary_representative(const VectorField& X, const JetSpace& S) {
  X.check_shape(S);
  std::vector<Expr> Q;
  const MultiIndex zero(static_cast<std::size_t>(S.n()));
  for (int a = 0; a < S.m(); ++a) {
    std::vector<Expr> terms{X.phi[static_cast<std::size_t>(a)]};
    for (int i = 0; i < S.n(); ++i) {
      const Expr& xi = X.xi[static_cast<std::size_t>(i)];
      if (!xi.is_zero()) terms.push_back(-(S.u(a, zero.plus(static_cast<std::size_t>(i))) * xi));
    }
    Q.push_back(Expr::sum(std::move(terms)));
  }
  return VectorField::vertical(std::move(Q), S);
}

std::vector<EvalPoint> characteristic_zero_points(const VectorField& X, int k, const JetSpace& S,
                                                  const Oracle& oracle, int count) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "characteristic points need one independent variable");
  if (!X.is_point(S)) throw Error(Errc::invalid_argument, "characteristic points need a point field");
  if (X.xi[0].is_zero()) throw Error(Errc::invalid_argument, "characteristic points need xi != 0");
  if (k > S.max_order()) throw Error(Errc::order_overflow, "order exceeds max_order");
  const VectorField Q = evolutionary_representative(X, S);
  // DQ[j][a] = D_x^j Q^a
  std::vector<std::vector<Expr>> DQ(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    for (int a = 0; a < S.m(); ++a) {
      DQ[static_cast<std::size_t>(j)].push_back(
          j == 0 ? Q.phi[static_cast<std::size_t>(a)] : total_derivative(DQ[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(a)], 0, S));
    }
  }
  std::vector<SymbolId> base;
  base.push_back(S.independent(0));
  for (int a = 0; a < S.m(); ++a) base.push_back(S.coordinate(a, MultiIndex{0}));
  for (const auto& p : S.parameter_names()) base.push_back(intern(p));
  Sampler sampler(oracle.settings().seed);
  std::vector<EvalPoint> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 100 * count) {
      throw Error(Errc::persistent_domain_failure, "could not sample points with D^j Q = 0");
    }
    EvalPoint p;
    for (auto s : base) p.set(s, sampler.draw());
    bool ok = true;
    try {
      const double xi = evaluate(X.xi[0], p);
      if (std::abs(xi) < 1e-3) continue;
      for (int j = 0; j < k && ok; ++j) {
        for (int a = 0; a < S.m(); ++a) p.set(S.coordinate(a, MultiIndex{j + 1}), 0.0);
        std::vector<double> next;
        for (int a = 0; a < S.m(); ++a) next.push_back(evaluate(DQ[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)], p) / xi);
        for (int a = 0; a < S.m(); ++a) {
          if (!std::isfinite(next[static_cast<std::size_t>(a)]) || std::abs(next[static_cast<std::size_t>(a)]) > 1e6) ok = false;
          p.set(S.coordinate(a, MultiIndex{j + 1}), next[static_cast<std::size_t>(a)]);
        }
      }
    } catch (const Error&) {
      ok = false;
    }
    if (ok) out.push_back(std::move(p));
  }
  return out;
}

ProlongedField prolong(const VectorField& X, const TwistData& twist, int k, const JetSpace& S,
                       const MuOptions& options) {
  if (std::holds_alternative<NoTwist>(twist)) return prolong_standard(X, k, S);
  if (auto* l = std::get_if<LambdaTwist>(&twist)) return prolong_lambda(X, l->lambda, k, S);
  if (auto* mu = std::get_if<MuTwist>(&twist)) return prolong_mu(X, *mu, k, S, options);
  const auto& s = std::get<SigmaTwist>(twist);
  if (s.sigma.rows() != 1) {
    throw Error(Errc::invalid_argument, "a sigma twist acts on a set of fields; use prolong_sigma");
  }
  return prolong_sigma({X}, s.sigma, k, S).front();
}

}  // namespace jetsym
