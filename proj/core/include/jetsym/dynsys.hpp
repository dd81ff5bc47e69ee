#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jetsym/rational.hpp"
#include "jetsym/symmetry.hpp"

namespace jetsym {

// dx^i/dt = f^i(x), encoded over a space with one independent variable t
// and the state variables as dependent variables.
class DynamicalSystem {
 public:
  DynamicalSystem(JetSpace space, std::vector<Expr> f);

  const JetSpace& space() const noexcept { return space_; }
  const std::vector<Expr>& f() const noexcept { return f_; }
  int dimension() const noexcept { return space_.m(); }
  DiffEq as_diffeq() const;

 private:
  JetSpace space_;
  std::vector<Expr> f_;
};

// structure[a][b][g] = c^g_{ab}, with [X_a, X_b] = c^g_{ab} X_g.
using StructureConstants = std::vector<std::vector<std::vector<Rational>>>;

struct SymmetryAlgebra {
  std::vector<VectorField> fields;  // vertical, coefficients on the state space
  StructureConstants structure;
};

// Fits rational structure constants at sample points; throws
// precondition_failure when the brackets leave the span with constant
// coefficients.
StructureConstants structure_constants(const std::vector<VectorField>& fields, const JetSpace& S,
                                       const Oracle& oracle = {});

struct AlgebraCertificate {
  bool antisymmetric = true;
  bool jacobi = true;
  Verdict brackets;
  bool holds() const { return antisymmetric && jacobi && brackets.holds; }
};

AlgebraCertificate certify_algebra(const SymmetryAlgebra& alg, const JetSpace& S, const Oracle& oracle = {});

// sigma_a^b = c^b_{ag} F^g + X_a(F^b).
ExprMatrix sigma_from_perturbation(const SymmetryAlgebra& alg, const std::vector<Expr>& F, const JetSpace& S);

// f + sum_a F^a phi_a.
DynamicalSystem perturbed_system(const DynamicalSystem& ds, const SymmetryAlgebra& alg, const std::vector<Expr>& F);

struct PerturbationOptions {
  Oracle oracle;
  std::optional<ExprMatrix> sigma;  // replaces the constructed sigma (negative controls)
};

struct PerturbationReport {
  ExprMatrix sigma;
  DynamicalSystem perturbed;
  Verdict involution;        // [Y_a, Y_b] = c^g_{ab} Y_g
  Verdict tangency;          // Y_a are symmetries of the perturbed system
  Verdict standard_tangency; // same with standard prolongations
  bool standard_fails() const { return !standard_tangency.holds; }
  bool passed() const { return involution.holds && tangency.holds; }
};

// Throws precondition_failure when the algebra does not certify or some X_a
// is not a symmetry of ds.
PerturbationReport verify_perturbation_symmetries(const DynamicalSystem& ds, const SymmetryAlgebra& alg, const std::vector<Expr>& F, int k,
                             const PerturbationOptions& options = {});

struct NormalFormInstance {
  DynamicalSystem ds;
  SymmetryAlgebra alg;
  std::vector<Expr> invariants;  // resonant monomials generating the invariant ring; {1} if none
};

// f = A x for A = diag(eigenvalues). The algebra is the commutant of A
// (E_ij with equal eigenvalues), which contains A itself.
NormalFormInstance normal_form_instance(const std::vector<Rational>& eigenvalues, int degree_bound = 6,
                                        const Oracle& oracle = {});

}  // namespace jetsym
