#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jetsym/fields.hpp"
#include "jetsym/oracle.hpp"
#include "jetsym/prolong.hpp"

namespace jetsym {

// Leading coordinate u^a_J solved as rhs.
struct SolvedEntry {
  int dependent = 0;
  MultiIndex index;
  Expr rhs;
};

// A system in solved form. Every coordinate u^a_K with K >= J for a solved
// entry (a, J) is principal and is eliminated by restriction.
class DiffEq {
 public:
  // residual defaults to lead - rhs for each solved entry.
  DiffEq(JetSpace space, std::vector<SolvedEntry> solved, std::vector<Expr> residual = {});

  const JetSpace& space() const noexcept { return space_; }
  int order() const noexcept { return order_; }
  const std::vector<SolvedEntry>& solved() const noexcept { return solved_; }
  const std::vector<Expr>& residuals() const noexcept { return residual_; }

  // Restricting F to the solution manifold gives 0.
  Verdict self_consistency(const Oracle& oracle = {}) const;

  // Space used for derivative consequences during restriction.
  const JetSpace& closure() const noexcept { return closure_; }
  // Principal coordinates are those reachable from a solved lead.
  std::optional<std::size_t> principal_entry(SymbolId s) const;

 private:
  JetSpace space_;
  JetSpace closure_;
  std::vector<SolvedEntry> solved_;
  std::vector<Expr> residual_;
  int order_ = 0;
};

// [e] on the solution manifold: principal coordinates replaced, with their
// total-derivative consequences, until none is left. Throws
// needs_unavailable_derivative beyond the closure order.
Expr restrict_to(const Expr& e, const DiffEq& eq);

struct ResidualOptions {
  bool restricted = true;  // false: strong-symmetry residual
  // Also V(D^j F) for j <= V.order() - order, i.e. tangency to the
  // prolonged system.
  bool prolonged = false;
};

std::vector<Expr> symmetry_residual(const DiffEq& eq, const ProlongedField& V, const ResidualOptions& options = {});

// Oracle verdict on all residuals.
Verdict check_symmetry(const DiffEq& eq, const ProlongedField& V, const Oracle& oracle = {},
                       const ResidualOptions& options = {});

struct InvolutiveSystem {
  std::vector<JetField> fields;
  // structure[a][b][g] = f^g_{ab}, with [X_a, X_b] = f^g_{ab} X_g
  std::vector<std::vector<std::vector<Expr>>> structure;
  Verdict certificate;
};

struct InvolutionFailure {
  int alpha = 0;
  int beta = 0;
  std::optional<Witness> witness;
  std::string reason;
};

using InvolutionResult = std::variant<InvolutiveSystem, InvolutionFailure>;

struct InvolutionOptions {
  Oracle oracle;
  // Extra candidate functions for the structure-function fit; defaults to
  // monomials of degree <= 2 in the coordinates the fields depend on.
  std::vector<Expr> fit_basis;
  int fit_degree = 2;
};

// Throws degenerate_distribution when the fields are linearly dependent at
// too many sample points.
InvolutionResult check_involution(const std::vector<JetField>& fields, const InvolutionOptions& options = {});
InvolutionResult check_involution(const std::vector<VectorField>& fields, const JetSpace& S,
                                  const InvolutionOptions& options = {});

struct AnsatzProblem {
  std::vector<Expr> basis;  // functions on M shared by every component
  // Optional per-component bases (n xi's then m phi's); an empty entry
  // freezes that component to 0.
  std::vector<std::vector<Expr>> per_component;
};

struct AnsatzSolution {
  std::vector<VectorField> fields;
  std::vector<std::vector<double>> coefficients;  // one vector per field, unknown order
  std::vector<bool> exact;                        // coefficients rationalized
  std::vector<Verdict> certificates;
  int unknowns = 0;
  int sample_points = 0;
  int rank = 0;
};

struct AnsatzOptions {
  Oracle oracle;
  int certify_trials = 200;
  double rel_threshold = 1e-8;
  std::int64_t max_den = 12;
  double rational_tol = 1e-6;
};

// Sigma twists are not accepted (a sigma twist couples several fields).
AnsatzSolution solve_determining_ansatz(const DiffEq& eq, const AnsatzProblem& problem, const TwistData& twist,
                                        const AnsatzOptions& options = {});

}  // namespace jetsym
