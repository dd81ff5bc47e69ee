#pragma once

#include <variant>
#include <vector>

#include "jetsym/fields.hpp"
#include "jetsym/matrix.hpp"
#include "jetsym/oracle.hpp"

namespace jetsym {

struct NoTwist {};
struct LambdaTwist {
  Expr lambda;
};
// Lambda[i] is the m x m matrix paired with dx^i.
struct MuTwist {
  std::vector<ExprMatrix> Lambda;
};
struct SigmaTwist {
  ExprMatrix sigma;
};

using TwistData = std::variant<NoTwist, LambdaTwist, MuTwist, SigmaTwist>;

// Rejects twist entries that depend on jet coordinates of order >= 2.
void check_twist_domain(const TwistData& twist, const JetSpace& S);

ProlongedField prolong_standard(const VectorField& X, int k, const JetSpace& S);
ProlongedField prolong_lambda(const VectorField& X, const Expr& lambda, int k, const JetSpace& S);

// D_i L_j - D_j L_i + [L_i, L_j] for each pair i < j, in (0,1), (0,2), ... order.
std::vector<ExprMatrix> check_mch(const MuTwist& mu, const JetSpace& S);
Verdict mch_verdict(const MuTwist& mu, const JetSpace& S, const Oracle& oracle = {});

struct MuOptions {
  bool unchecked = false;  // skip the compatibility check
  Oracle oracle;
};

// Throws mch_violation unless the compatibility condition holds or the
// caller opts out.
ProlongedField prolong_mu(const VectorField& X, const MuTwist& mu, int k, const JetSpace& S,
                          const MuOptions& options = {});
// psi^a for a = 1..m at the multi-index reached by following `path`
// (a sequence of directions) through the same recursion. Used to test
// path independence.
std::vector<Expr> prolong_mu_along_path(const VectorField& X, const MuTwist& mu,
                                        const std::vector<int>& path, const JetSpace& S);
ProlongedField prolong_Lambda_ode(const VectorField& X, const ExprMatrix& Lambda, int k,
                                  const JetSpace& S);

std::vector<ProlongedField> prolong_sigma(const std::vector<VectorField>& Xs, const ExprMatrix& sigma,
                                          int k, const JetSpace& S);

// Vertical field with characteristics Q^a = phi^a - u^a_i xi^i.
VectorField evolutionary_representative(const VectorField& X, const JetSpace& S);

// Jet points (one independent variable, xi != 0) at which D_x^j Q^a = 0 for
// all j < k. Base coordinates are drawn from the oracle's sampler; each
// u^a_(j+1) is then solved from D_x^j Q^a = 0, which is affine in it with
// slope -xi.
std::vector<EvalPoint> characteristic_zero_points(const VectorField& X, int k, const JetSpace& S,
                                                  const Oracle& oracle, int count);

// Dispatch on the twist. Sigma needs a field set; use prolong_sigma.
ProlongedField prolong(const VectorField& X, const TwistData& twist, int k, const JetSpace& S,
                       const MuOptions& options = {});

}  // namespace jetsym
