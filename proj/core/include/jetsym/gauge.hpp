#pragma once

#include <vector>

#include "jetsym/prolong.hpp"

namespace jetsym {

// Determinant of A is checked at oracle sample points; throws
// singular_at_sample when it is (numerically) zero at any of them.
void check_invertible(const ExprMatrix& A, const Oracle& oracle = {});

// Lambda_i = A^{-1} D_i A, so that A psi_mu is the standard prolongation of
// the field with characteristics A Q.
MuTwist mu_from_gauge(const ExprMatrix& A, const JetSpace& S, const Oracle& oracle = {});

// sigma = A^{-1} D_x A (n = 1).
SigmaTwist sigma_from_gauge(const ExprMatrix& A, const JetSpace& S, const Oracle& oracle = {});

struct GaugeReport {
  std::vector<Expr> residuals;
  Verdict verdict;
};

// A psi_mu - psi~ for all (a, J) with |J| <= k. X must be vertical.
GaugeReport verify_gauge_diagram_mu(const VectorField& X, const ExprMatrix& A, int k, const JetSpace& S,
                                    const Oracle& oracle = {});

// Z_a - A_a^b Y_b coefficientwise, where Y is the sigma-prolongation of Xs
// and Z the standard prolongation of W_a = A_a^b X_b.
GaugeReport verify_gauge_diagram_sigma(const std::vector<VectorField>& Xs, const ExprMatrix& A, int k,
                                       const JetSpace& S, const Oracle& oracle = {});

}  // namespace jetsym
