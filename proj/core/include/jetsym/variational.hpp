#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jetsym/symmetry.hpp"

namespace jetsym {

// sum_J (-D)_J dL/du^a_J for each dependent variable a.
std::vector<Expr> euler_lagrange(const Expr& L, const JetSpace& S);

// All Euler components vanish.
Verdict is_total_derivative(const Expr& e, const JetSpace& S, const Oracle& oracle = {});

// X^(n)(L) + L D_x xi - D_x F (n = 1, m = 1).
Expr variational_residual(const VectorField& X, const Expr& L, const Expr& F, const JetSpace& S);
Verdict check_variational_symmetry(const VectorField& X, const Expr& L, const Expr& F, const JetSpace& S,
                                   const Oracle& oracle = {});
// X^(n)(L) + L D_x xi is a total derivative for some F.
Verdict variational_symmetry_exists(const VectorField& X, const Expr& L, const JetSpace& S, const Oracle& oracle = {});

// X^(n)_lambda(L) + L (D_x + lambda) xi - (D_x + lambda) F.
Expr variational_lambda_residual(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                                 const JetSpace& S);
Verdict check_variational_lambda_symmetry(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                                          const JetSpace& S, const Oracle& oracle = {});

// X^(n)_lambda(L) - Q E[L] - (D_x + lambda) F.
Expr noether_identity_residual(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& F,
                               const JetSpace& S);

// For vertical X = Q d_u the F that makes the identity above hold:
// sum_k sum_{j<k} (-D_x)^j(dL/du_k) (D_x + lambda)^(k-1-j) Q.
Expr noether_flux(const VectorField& X, const Expr& lambda, const Expr& L, const JetSpace& S);

// Q E[L] - (D_x + lambda) P.
Verdict verify_flux_identity(const VectorField& X, const Expr& lambda, const Expr& L, const Expr& P, const JetSpace& S,
                       const Oracle& oracle = {});

struct SolvablePairOptions {
  Oracle oracle;
  std::vector<Expr> basis;  // ansatz for h; default monomials of degree <= 2
  int points = 60;
};

struct SolvablePair {
  std::optional<Expr> h;
  Verdict certificate;
  std::string failure;       // empty on success
  std::optional<Witness> witness;
};

// Looks for h with [X1_lambda1, X2_lambda2] = h X1_lambda1 on J^k.
SolvablePair check_solvable_pair(const VectorField& X1, const Expr& lambda1, const VectorField& X2,
                                 const Expr& lambda2, int k, const JetSpace& S, const SolvablePairOptions& options = {});

struct MuEulerLagrange {
  std::vector<Expr> equations;      // D_x pi_a - L_{u^a} - (Lambda^T pi)_a
  std::vector<Expr> accelerations;  // u^a_xx = ...
  DiffEq system() const;
  JetSpace space;
};

// First-order L, n = 1. Throws degenerate_lagrangian when the Hessian in the
// velocities is singular.
MuEulerLagrange mu_euler_lagrange(const Expr& L, const ExprMatrix& Lambda, const JetSpace& S,
                                  const Oracle& oracle = {});

struct MuConservation {
  Verdict hypothesis;    // X^(1)_mu(L) == 0
  Verdict conservation;  // D_x P == 0 on the mu-Euler-Lagrange flow
  Expr P;
};

MuConservation check_mu_conservation(const Expr& L, const ExprMatrix& Lambda, const VectorField& X,
                                     const JetSpace& S, const Oracle& oracle = {});

}  // namespace jetsym
