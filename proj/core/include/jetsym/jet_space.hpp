#pragma once

#include <compare>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jetsym/expr.hpp"
#include "jetsym/parser.hpp"

namespace jetsym {

// Counts of derivatives along each independent direction. Mixed partials
// commute, so u_xy and u_yx share one index.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : j_(n, 0) {}
  MultiIndex(std::initializer_list<int> counts) : j_(counts) {}
  explicit MultiIndex(std::vector<int> counts) : j_(std::move(counts)) {}

  std::size_t size() const noexcept { return j_.size(); }
  int operator[](std::size_t i) const { return j_[i]; }
  int order() const noexcept;
  bool is_zero() const noexcept { return order() == 0; }

  MultiIndex plus(std::size_t i) const;
  std::optional<MultiIndex> minus(std::size_t i) const;
  bool contains(const MultiIndex& other) const;  // componentwise >=
  MultiIndex difference(const MultiIndex& other) const;

  // Largest direction with a nonzero count; -1 for the zero index.
  int last_direction() const noexcept;
  // Directions in nondecreasing order, e.g. (2,1) -> {0,0,1}.
  std::vector<int> path() const;

  const std::vector<int>& counts() const noexcept { return j_; }

  // Graded order: lower total order first, then x-heavier first.
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b);
  friend bool operator==(const MultiIndex& a, const MultiIndex& b) = default;

 private:
  std::vector<int> j_;
};

struct JetCoordinate {
  int dependent = 0;
  MultiIndex index;
};

// Coordinates (x^i, u^a, u^a_J) of J^k M. Copies share their tables.
class JetSpace {
 public:
  JetSpace(std::vector<std::string> independent, std::vector<std::string> dependent,
           int max_order, std::vector<std::string> parameters = {});

  int n() const noexcept;
  int m() const noexcept;
  int max_order() const noexcept;
  const std::vector<std::string>& independent_names() const noexcept;
  const std::vector<std::string>& dependent_names() const noexcept;
  const std::vector<std::string>& parameter_names() const noexcept;

  JetSpace with_max_order(int k) const;

  SymbolId independent(int i) const;
  Expr x(int i = 0) const { return Expr::symbol(independent(i)); }
  // Throws order_overflow when |J| exceeds max_order.
  SymbolId coordinate(int a, const MultiIndex& J) const;
  Expr u(int a, const MultiIndex& J) const { return Expr::symbol(coordinate(a, J)); }
  Expr u(int a = 0) const { return u(a, MultiIndex(static_cast<std::size_t>(n()))); }
  // One-independent-variable shorthand: u^a_(order).
  Expr u_order(int a, int order) const;

  std::optional<int> independent_index(SymbolId s) const;
  std::optional<JetCoordinate> jet(SymbolId s) const;
  bool is_parameter(SymbolId s) const;

  // All multi-indices of exactly / at most the given order, graded.
  std::vector<MultiIndex> multi_indices(int order) const;
  std::vector<MultiIndex> multi_indices_upto(int order) const;

  // x's and every u^a_J with |J| <= order.
  std::vector<SymbolId> coordinates(int order) const;

  // Highest jet order among free symbols: -1 when the expression involves
  // no dependent coordinates at all.
  int order_of(const Expr& e) const;
  bool is_on_base(const Expr& e) const { return order_of(e) <= 0; }

  const SymbolTable& symbols() const;
  Expr parse(std::string_view text) const;

  std::string coordinate_name(int a, const MultiIndex& J) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// D_i e = d_i e + sum_{a,J} u^a_{J,i} de/du^a_J. Throws order_overflow when e
// involves coordinates of order max_order.
Expr total_derivative(const Expr& e, int i, const JetSpace& S);
// D_J as iterated D_i along the nondecreasing path of J.
Expr total_derivative(const Expr& e, const MultiIndex& J, const JetSpace& S);
// D_x^times for one independent variable.
Expr total_derivative_n(const Expr& e, int times, const JetSpace& S);

// omega^a_J = du^a_J - u^a_{J,i} dx^i, stored as (coordinate, coefficient).
struct ContactForm {
  int dependent = 0;
  MultiIndex index;
  std::vector<std::pair<SymbolId, Expr>> coefficients;
};

std::vector<ContactForm> contact_forms(const JetSpace& S);

}  // namespace jetsym
