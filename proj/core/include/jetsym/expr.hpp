#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "jetsym/rational.hpp"

namespace jetsym {

// Symbols are interned by name; the id is stable for the life of the process.
using SymbolId = std::uint32_t;

SymbolId intern(std::string_view name);
const std::string& symbol_name(SymbolId id);

enum class NodeKind : std::uint8_t { constant, symbol, apply, power, product, sum };
enum class Func : std::uint8_t { exp, log, sin, cos, tan, sqrt };

std::string_view func_name(Func f) noexcept;

struct Node;

// Immutable, canonicalized expression tree. Copies share structure.
//
// Canonical form: nested sums and products are flattened, constants are
// folded, like terms and like powers are merged, and children of sums and
// products are ordered by `compare`. No distribution or factoring is done;
// identities beyond this light normal form are decided by the numeric oracle.
class Expr {
 public:
  Expr();  // zero
  Expr(int value);  // NOLINT
  Expr(std::int64_t value);  // NOLINT
  Expr(const Rational& value);  // NOLINT

  static Expr symbol(SymbolId id);
  static Expr symbol(std::string_view name) { return symbol(intern(name)); }
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr power(const Expr& base, const Rational& exponent);
  static Expr apply(Func f, const Expr& arg);

  NodeKind kind() const noexcept;
  bool is_constant() const noexcept { return kind() == NodeKind::constant; }
  bool is_symbol() const noexcept { return kind() == NodeKind::symbol; }
  bool is_zero() const noexcept;
  bool is_one() const noexcept;

  // Valid for constants.
  const Rational& value() const noexcept;
  // Valid for powers.
  const Rational& exponent() const noexcept;
  // Valid for symbols.
  SymbolId symbol_id() const noexcept;
  // Valid for applications.
  Func func() const noexcept;
  // Sum terms, product factors, or the single base/argument.
  std::span<const Expr> children() const noexcept;

  // Sorted by id.
  std::span<const SymbolId> free_symbols() const noexcept;
  bool depends_on(SymbolId id) const noexcept;

  std::size_t hash() const noexcept;
  std::size_t size() const;  // number of distinct nodes in the DAG
  const Node* node() const noexcept { return node_.get(); }

  std::string str() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend struct ExprBuilder;

  std::shared_ptr<const Node> node_;
};

// Total order used for canonical sorting; 0 iff structurally equal.
int compare(const Expr& a, const Expr& b);

inline bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

struct ExprHash {
  std::size_t operator()(const Expr& e) const noexcept { return e.hash(); }
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr pow(const Expr& base, const Rational& exponent);
Expr exp(const Expr& e);
Expr log(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr sqrt(const Expr& e);

std::ostream& operator<<(std::ostream& os, const Expr& e);

using Bindings = std::unordered_map<SymbolId, Expr>;

// Exact partial derivative, all other symbols held fixed.
Expr partial(const Expr& e, SymbolId s);

// sum_s derivatives[s] * de/ds in a single pass; the action of a vector field
// whose components are `derivatives`.
Expr derive(const Expr& e, const Bindings& derivatives);

// Simultaneous (non-iterated) substitution followed by canonicalization.
Expr substitute(const Expr& e, const Bindings& bindings);

// Assignment of real values to symbols.
class EvalPoint {
 public:
  EvalPoint() = default;
  EvalPoint(std::initializer_list<std::pair<std::string_view, double>> values);

  void set(SymbolId id, double value) { values_[id] = value; }
  void set(std::string_view name, double value) { set(intern(name), value); }
  bool contains(SymbolId id) const { return values_.count(id) > 0; }
  double at(SymbolId id) const;
  const std::map<SymbolId, double>& values() const noexcept { return values_; }

 private:
  std::map<SymbolId, double> values_;
};

// Throws Error(Errc::domain) for singular evaluations and unbound symbols.
double evaluate(const Expr& e, const EvalPoint& point);

}  // namespace jetsym
