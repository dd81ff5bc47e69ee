#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jetsym/symmetry.hpp"

namespace jetsym {

// V(zeta) == 0 for every V.
Verdict invariance(const std::vector<ProlongedField>& Vs, const Expr& zeta, const Oracle& oracle = {});
bool is_invariant(const std::vector<ProlongedField>& Vs, const Expr& zeta, const Oracle& oracle = {});

// D_x zeta / D_x eta; throws degenerate_base when D_x eta vanishes.
Expr ibdp_step(const Expr& eta, const Expr& zeta, const JetSpace& S, const Oracle& oracle = {});

struct InvariantChain {
  Expr eta;
  Expr zeta;
  std::vector<Expr> generated;  // orders 2 .. target
  std::vector<Verdict> certificates;
};

// Throws precondition_failure when eta or zeta is not invariant or a sigma
// family is not in involution, ibdp_violation at the first generated order
// that is not annihilated.
InvariantChain generate_invariant_chain(const std::vector<ProlongedField>& Vs, const Expr& eta, const Expr& zeta,
                                        int target, const JetSpace& S, const Oracle& oracle = {});

struct ReductionResult {
  Expr eta;
  Expr zeta;
  JetSpace reduced;              // y, w
  std::vector<Expr> chain;       // zeta_(1) .. zeta_(N)
  std::vector<Expr> substitution;  // w_(j) -> chain[j], j < N - 1
  Expr rhs;                      // w_(N-1) = rhs(y, w, ..., w_(N-2))
  DiffEq equation;
  Verdict certificate;
};

// Scalar ODE of order N >= 2. eta must be affine in x or in u; zeta must be
// affine in u_x. Throws non_generic_chain or not_expressible.
ReductionResult reduce_ode(const DiffEq& eq, const Expr& eta, const Expr& zeta, const Oracle& oracle = {});

// Cumulative composite Simpson on a uniform grid with v(y_0) = v0.
std::vector<double> reconstruct(const std::vector<double>& y, const std::vector<double>& w, double v0);

struct SampledFunction {
  std::vector<double> y;
  std::vector<double> values;
};

// Two-column CSV with header "<first>,<second>".
SampledFunction read_csv(std::istream& in, const std::string& first = "y", const std::string& second = "w");
void write_csv(std::ostream& out, const SampledFunction& f, const std::string& first = "y",
               const std::string& second = "v");

}  // namespace jetsym
