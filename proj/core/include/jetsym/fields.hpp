#pragma once

#include <map>
#include <utility>
#include <vector>

#include "jetsym/expr.hpp"
#include "jetsym/jet_space.hpp"

namespace jetsym {

// xi^i d_i + phi^a d_a. Point fields have coefficients on M; evolutionary
// representatives and characteristics may carry first-order jet coordinates.
struct VectorField {
  std::vector<Expr> xi;   // n entries
  std::vector<Expr> phi;  // m entries

  static VectorField zero(const JetSpace& S);
  static VectorField vertical(std::vector<Expr> phi, const JetSpace& S);

  bool is_vertical() const;
  // No jet coordinates of order >= 1 in any coefficient.
  bool is_point(const JetSpace& S) const;
  void check_shape(const JetSpace& S) const;
};

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator*(const Expr& s, const VectorField& v);

// A first-order differential operator sum_s c_s d/ds over arbitrary
// coordinates. Used for commutators of prolonged fields and for fields on
// J^kM in general.
class JetField {
 public:
  JetField() = default;
  explicit JetField(std::map<SymbolId, Expr> components);

  const std::map<SymbolId, Expr>& components() const noexcept { return c_; }
  Expr coefficient(SymbolId s) const;
  Expr apply(const Expr& f) const { return derive(f, bindings_); }
  bool is_zero_structurally() const { return c_.empty(); }

 private:
  std::map<SymbolId, Expr> c_;
  Bindings bindings_;
};

JetField commutator(const JetField& a, const JetField& b);
JetField operator+(const JetField& a, const JetField& b);
JetField operator-(const JetField& a, const JetField& b);
JetField operator*(const Expr& s, const JetField& v);

// Pairs of corresponding coefficients over the union of coordinates.
std::vector<std::pair<Expr, Expr>> coefficient_pairs(const JetField& a, const JetField& b);

JetField as_jet_field(const VectorField& v, const JetSpace& S);
// Inverse of as_jet_field; throws invalid_argument when the operator has
// components along derivative coordinates.
VectorField as_vector_field(const JetField& v, const JetSpace& S);
VectorField commutator(const VectorField& a, const VectorField& b, const JetSpace& S);

enum class TwistKind { standard, lambda, mu, sigma };
const char* to_string(TwistKind k) noexcept;

// The coefficient table psi^a_J, 0 <= |J| <= order, of a (twisted)
// prolongation, together with the base field it came from.
class ProlongedField {
 public:
  ProlongedField(VectorField base, int order, TwistKind twist, JetSpace space);

  const VectorField& base() const noexcept { return base_; }
  int order() const noexcept { return order_; }
  TwistKind twist() const noexcept { return twist_; }
  const JetSpace& space() const noexcept { return space_; }

  const Expr& psi(int a, const MultiIndex& J) const;
  const Expr& psi(int a, int j) const { return psi(a, MultiIndex{j}); }  // n = 1
  void set_psi(int a, const MultiIndex& J, Expr value);

  Expr apply(const Expr& f) const { return as_jet_field().apply(f); }
  JetField as_jet_field() const;
  ProlongedField truncate(int k) const;

 private:
  VectorField base_;
  int order_;
  TwistKind twist_;
  JetSpace space_;
  std::map<std::pair<int, MultiIndex>, Expr> psi_;
};

// Coefficient-by-coefficient comparison of two tables of equal order.
std::vector<std::pair<Expr, Expr>> coefficient_pairs(const ProlongedField& a, const ProlongedField& b);

// Residuals of L_V omega^a_J modulo the contact ideal, |J| < V.order(). For
// theta = L_V omega^a_J the residuals are its coefficients along the top
// coordinates u^b_K, |K| = k, and theta_{x^i} + sum theta_{u^b_K} u^b_{K,i}
// over |K| < k. All vanish iff V preserves the contact structure.
std::vector<Expr> annihilates_contact(const ProlongedField& V);

}  // namespace jetsym
