#include "jetsym/gauge.hpp"

#include <cmath>

#include "jetsym/error.hpp"

namespace jetsym {

void check_invertible(const ExprMatrix& A, const Oracle& oracle) {
  if (!A.is_square()) throw Error(Errc::size_mismatch, "gauge matrix is not square");
  Expr det = determinant(A);
  if (det.is_zero()) throw Error(Errc::singular_at_sample, "gauge matrix has zero determinant");
  std::vector<Expr> probe{det};
  auto pts = oracle.sample_points(probe, oracle.settings().trials);
  for (const auto& p : pts) {
    if (std::abs(evaluate(det, p)) < 1e-10) throw Error(Errc::singular_at_sample, "gauge matrix singular at a sample point");
  }
}

MuTwist mu_from_gauge(const ExprMatrix& A, const JetSpace& S, const Oracle& oracle) {
  if (A.rows() != static_cast<std::size_t>(S.m())) throw Error(Errc::size_mismatch, "gauge matrix must be m x m");
  check_invertible(A, oracle);
  ExprMatrix Ai = inverse(A);
  MuTwist mu;
  for (int i = 0; i < S.n(); ++i) mu.Lambda.push_back(Ai * total_derivative(A, i, S));
  return mu;
}

SigmaTwist sigma_from_gauge(const ExprMatrix& A, const JetSpace& S, const Oracle& oracle) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "sigma twists need one independent variable");
  check_invertible(A, oracle);
  return SigmaTwist{inverse(A) * total_derivative(A, 0, S)};
}

GaugeReport verify_gauge_diagram_mu(const VectorField& X, const ExprMatrix& A, int k, const JetSpace& S,
                                    const Oracle& oracle) {
  X.check_shape(S);
  if (!X.is_vertical()) throw Error(Errc::non_vertical_input, "gauge diagram needs a vertical field");
  auto mu = mu_from_gauge(A, S, oracle);
  auto V = prolong_mu(X, mu, k, S, {.unchecked = true, .oracle = oracle});
  auto W = prolong_standard(VectorField::vertical(A * X.phi, S), k, S);
  GaugeReport out;
  for (const auto& J : S.multi_indices_upto(k)) {
    std::vector<Expr> psi;
    for (int b = 0; b < S.m(); ++b) psi.push_back(V.psi(b, J));
    auto Apsi = A * psi;
    for (int a = 0; a < S.m(); ++a) out.residuals.push_back(Apsi[static_cast<std::size_t>(a)] - W.psi(a, J));
  }
  out.verdict = oracle.all_zero(out.residuals);
  return out;
}

GaugeReport verify_gauge_diagram_sigma(const std::vector<VectorField>& Xs, const ExprMatrix& A, int k,
                                       const JetSpace& S, const Oracle& oracle) {
  if (A.rows() != Xs.size()) throw Error(Errc::size_mismatch, "gauge matrix size differs from the field count");
  auto sigma = sigma_from_gauge(A, S, oracle);
  auto Ys = prolong_sigma(Xs, sigma.sigma, k, S);
  const std::size_t r = Xs.size();
  GaugeReport out;
  for (std::size_t a = 0; a < r; ++a) {
    VectorField W = VectorField::zero(S);
    JetField AY;
    for (std::size_t b = 0; b < r; ++b) {
      W = W + A(a, b) * Xs[b];
      AY = AY + A(a, b) * Ys[b].as_jet_field();
    }
    auto Z = prolong_standard(W, k, S).as_jet_field();
    for (const auto& [z, y] : coefficient_pairs(Z, AY)) out.residuals.push_back(z - y);
  }
  out.verdict = oracle.all_zero(out.residuals);
  return out;
}

}  // namespace jetsym
