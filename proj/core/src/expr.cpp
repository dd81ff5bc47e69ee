#include "jetsym/expr.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <unordered_set>

#include "jetsym/error.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

// ---------------------------------------------------------------------------
// Symbol registry

namespace {

struct SymbolRegistry {
  std::shared_mutex mutex;
  std::deque<std::string> names;
  std::unordered_map<std::string, SymbolId> ids;
  std::vector<std::size_t> hashes;
};

SymbolRegistry& registry() {
  static SymbolRegistry r;
  return r;
}

std::size_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::size_t symbol_hash(SymbolId id) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.hashes[id];
}

}  // namespace

SymbolId intern(std::string_view name) {
  auto& r = registry();
  {
    std::shared_lock lock(r.mutex);
    auto it = r.ids.find(std::string(name));
    if (it != r.ids.end()) return it->second;
  }
  std::unique_lock lock(r.mutex);
  auto it = r.ids.find(std::string(name));
  if (it != r.ids.end()) return it->second;
  auto id = static_cast<SymbolId>(r.names.size());
  r.names.emplace_back(name);
  r.hashes.push_back(fnv1a(name));
  r.ids.emplace(std::string(name), id);
  return id;
}

const std::string& symbol_name(SymbolId id) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.names.at(id);
}

std::string_view func_name(Func f) noexcept {
  switch (f) {
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Nodes

struct Node {
  NodeKind kind = NodeKind::constant;
  Func func = Func::exp;
  SymbolId sym = 0;
  Rational value;  // constant value or power exponent
  std::vector<Expr> args;
  std::vector<SymbolId> free;
  std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

std::vector<SymbolId> merge_free(const std::vector<Expr>& args) {
  std::vector<SymbolId> out;
  for (const auto& a : args) {
    auto f = a.free_symbols();
    if (f.empty()) continue;
    if (out.empty()) {
      out.assign(f.begin(), f.end());
      continue;
    }
    std::vector<SymbolId> merged;
    merged.reserve(out.size() + f.size());
    std::set_union(out.begin(), out.end(), f.begin(), f.end(), std::back_inserter(merged));
    out.swap(merged);
  }
  return out;
}

}  // namespace

struct ExprBuilder {
  static Expr make(NodeKind kind, std::vector<Expr> args, Rational value = Rational(),
                   SymbolId sym = 0, Func func = Func::exp) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->func = func;
    node->sym = sym;
    node->value = value;
    std::size_t h = static_cast<std::size_t>(kind) * 0x100000001b3ull;
    switch (kind) {
      case NodeKind::constant:
        h = mix(h, std::hash<std::int64_t>{}(value.num()));
        h = mix(h, std::hash<std::int64_t>{}(value.den()));
        break;
      case NodeKind::symbol:
        h = mix(h, symbol_hash(sym));
        node->free.push_back(sym);
        break;
      case NodeKind::apply:
        h = mix(h, static_cast<std::size_t>(func) + 17);
        break;
      case NodeKind::power:
        h = mix(h, std::hash<std::int64_t>{}(value.num()));
        h = mix(h, std::hash<std::int64_t>{}(value.den()));
        break;
      default:
        break;
    }
    for (const auto& a : args) h = mix(h, a.hash());
    if (kind != NodeKind::symbol) node->free = merge_free(args);
    node->args = std::move(args);
    node->hash = h;
    return Expr(std::shared_ptr<const Node>(std::move(node)));
  }

  static Expr constant(const Rational& v) { return make(NodeKind::constant, {}, v); }
};

namespace {

const Expr& zero_expr() {
  static const Expr z = ExprBuilder::constant(Rational(0));
  return z;
}

const Expr& one_expr() {
  static const Expr o = ExprBuilder::constant(Rational(1));
  return o;
}

Expr make_constant(const Rational& v) {
  if (v.is_zero()) return zero_expr();
  if (v.is_one()) return one_expr();
  return ExprBuilder::constant(v);
}

}  // namespace

Expr::Expr() : node_(zero_expr().node_) {}
Expr::Expr(int value) : Expr(Rational(value)) {}
Expr::Expr(std::int64_t value) : Expr(Rational(value)) {}
Expr::Expr(const Rational& value) : node_(make_constant(value).node_) {}

Expr Expr::symbol(SymbolId id) { return ExprBuilder::make(NodeKind::symbol, {}, Rational(), id); }

NodeKind Expr::kind() const noexcept { return node_->kind; }
bool Expr::is_zero() const noexcept {
  return node_->kind == NodeKind::constant && node_->value.is_zero();
}
bool Expr::is_one() const noexcept {
  return node_->kind == NodeKind::constant && node_->value.is_one();
}
const Rational& Expr::value() const noexcept { return node_->value; }
const Rational& Expr::exponent() const noexcept { return node_->value; }
SymbolId Expr::symbol_id() const noexcept { return node_->sym; }
Func Expr::func() const noexcept { return node_->func; }
std::span<const Expr> Expr::children() const noexcept { return node_->args; }
std::span<const SymbolId> Expr::free_symbols() const noexcept { return node_->free; }
bool Expr::depends_on(SymbolId id) const noexcept {
  return std::binary_search(node_->free.begin(), node_->free.end(), id);
}
std::size_t Expr::hash() const noexcept { return node_->hash; }

std::size_t Expr::size() const {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{node_.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const auto& a : n->args) stack.push_back(a.node());
  }
  return seen.size();
}

// ---------------------------------------------------------------------------
// Ordering

int compare(const Expr& a, const Expr& b) {
  if (a.node() == b.node()) return 0;
  auto ka = static_cast<int>(a.kind());
  auto kb = static_cast<int>(b.kind());
  if (ka != kb) return ka < kb ? -1 : 1;
  switch (a.kind()) {
    case NodeKind::constant: {
      auto c = a.value() <=> b.value();
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case NodeKind::symbol: {
      if (a.symbol_id() == b.symbol_id()) return 0;
      int c = symbol_name(a.symbol_id()).compare(symbol_name(b.symbol_id()));
      return c < 0 ? -1 : 1;
    }
    default:
      break;
  }
  if (a.hash() != b.hash()) return a.hash() < b.hash() ? -1 : 1;
  if (a.kind() == NodeKind::apply && a.func() != b.func()) {
    return a.func() < b.func() ? -1 : 1;
  }
  if (a.kind() == NodeKind::power && a.exponent() != b.exponent()) {
    return (a.exponent() <=> b.exponent()) < 0 ? -1 : 1;
  }
  auto ca = a.children();
  auto cb = b.children();
  if (ca.size() != cb.size()) return ca.size() < cb.size() ? -1 : 1;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    int c = compare(ca[i], cb[i]);
    if (c != 0) return c;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Canonical constructors

namespace {

// Splits a term into rational coefficient and the remaining monomial.
std::pair<Rational, Expr> split_coefficient(const Expr& t) {
  if (t.kind() == NodeKind::product) {
    auto ch = t.children();
    if (ch.front().is_constant()) {
      if (ch.size() == 2) return {ch.front().value(), ch[1]};
      std::vector<Expr> rest(ch.begin() + 1, ch.end());
      return {ch.front().value(), ExprBuilder::make(NodeKind::product, std::move(rest))};
    }
  }
  return {Rational(1), t};
}

Expr scale_monomial(const Rational& c, const Expr& rest) {
  if (c.is_one()) return rest;
  std::vector<Expr> factors;
  factors.push_back(make_constant(c));
  if (rest.kind() == NodeKind::product) {
    auto ch = rest.children();
    factors.insert(factors.end(), ch.begin(), ch.end());
  } else {
    factors.push_back(rest);
  }
  return ExprBuilder::make(NodeKind::product, std::move(factors));
}

void collect_terms(const Expr& t, Rational& constant, std::map<Expr, Rational, ExprLess>& terms) {
  if (t.kind() == NodeKind::sum) {
    for (const auto& c : t.children()) collect_terms(c, constant, terms);
    return;
  }
  if (t.is_constant()) {
    constant += t.value();
    return;
  }
  auto [c, rest] = split_coefficient(t);
  auto [it, inserted] = terms.emplace(rest, c);
  if (!inserted) it->second += c;
}

void collect_factors(const Expr& f, Rational& coeff, std::map<Expr, Rational, ExprLess>& powers) {
  if (f.kind() == NodeKind::product) {
    for (const auto& c : f.children()) collect_factors(c, coeff, powers);
    return;
  }
  if (f.is_constant()) {
    coeff *= f.value();
    return;
  }
  Expr base = f;
  Rational e(1);
  if (f.kind() == NodeKind::power) {
    base = f.children().front();
    e = f.exponent();
  }
  auto [it, inserted] = powers.emplace(base, e);
  if (!inserted) it->second += e;
}

}  // namespace

Expr Expr::sum(std::vector<Expr> terms) {
  if (terms.empty()) return zero_expr();
  if (terms.size() == 1) return terms.front();
  Rational constant(0);
  std::map<Expr, Rational, ExprLess> collected;
  for (const auto& t : terms) collect_terms(t, constant, collected);
  std::vector<Expr> out;
  out.reserve(collected.size() + 1);
  if (!constant.is_zero()) out.push_back(make_constant(constant));
  for (const auto& [rest, c] : collected) {
    if (c.is_zero()) continue;
    out.push_back(scale_monomial(c, rest));
  }
  if (out.empty()) return zero_expr();
  if (out.size() == 1) return out.front();
  std::sort(out.begin(), out.end(), ExprLess{});
  return ExprBuilder::make(NodeKind::sum, std::move(out));
}

Expr Expr::product(std::vector<Expr> factors) {
  if (factors.empty()) return one_expr();
  if (factors.size() == 1) return factors.front();
  Rational coeff(1);
  std::map<Expr, Rational, ExprLess> powers;
  for (const auto& f : factors) {
    collect_factors(f, coeff, powers);
    if (coeff.is_zero()) return zero_expr();
  }
  std::vector<Expr> out;
  out.reserve(powers.size() + 1);
  for (const auto& [base, e] : powers) {
    if (e.is_zero()) continue;
    Expr p = power(base, e);
    if (p.is_constant()) {
      coeff *= p.value();
    } else if (p.kind() == NodeKind::product) {
      // Integer power of a product distributes; merge the pieces back in.
      for (const auto& c : p.children()) {
        if (c.is_constant()) {
          coeff *= c.value();
        } else {
          out.push_back(c);
        }
      }
    } else {
      out.push_back(p);
    }
  }
  if (coeff.is_zero()) return zero_expr();
  if (out.empty()) return make_constant(coeff);
  std::sort(out.begin(), out.end(), ExprLess{});
  // Distribution above can produce repeated bases; merge again if so.
  if (out.size() > 1) {
    std::set<Expr, ExprLess> bases;
    for (const auto& f : out) {
      Expr b = f.kind() == NodeKind::power ? f.children().front() : f;
      if (!bases.insert(b).second) {
        std::vector<Expr> again = out;
        again.push_back(make_constant(coeff));
        return product(std::move(again));
      }
    }
  }
  if (out.size() == 1 && coeff.is_one()) return out.front();
  if (!coeff.is_one()) out.insert(out.begin(), make_constant(coeff));
  return ExprBuilder::make(NodeKind::product, std::move(out));
}

Expr Expr::power(const Expr& base, const Rational& e) {
  if (e.is_zero()) return one_expr();
  if (e.is_one()) return base;
  switch (base.kind()) {
    case NodeKind::constant: {
      const Rational& b = base.value();
      if (b.is_zero()) {
        if (e.is_negative()) throw Error(Errc::domain, "division by zero");
        return zero_expr();
      }
      if (b.is_one()) return one_expr();
      if (e.is_integer()) return make_constant(b.pow(e.num()));
      if (auto r = b.root(e.den())) return make_constant(r->pow(e.num()));
      break;
    }
    case NodeKind::power:
      if (e.is_integer()) return power(base.children().front(), base.exponent() * e);
      break;
    case NodeKind::product:
      if (e.is_integer()) {
        std::vector<Expr> parts;
        for (const auto& c : base.children()) parts.push_back(power(c, e));
        return product(std::move(parts));
      }
      break;
    default:
      break;
  }
  return ExprBuilder::make(NodeKind::power, {base}, e);
}

Expr Expr::apply(Func f, const Expr& arg) {
  if (f == Func::sqrt) return power(arg, Rational(1, 2));
  if (arg.is_zero()) {
    switch (f) {
      case Func::exp: return one_expr();
      case Func::sin: return zero_expr();
      case Func::cos: return one_expr();
      case Func::tan: return zero_expr();
      case Func::log: throw Error(Errc::domain, "log(0)");
      default: break;
    }
  }
  if (f == Func::log && arg.is_one()) return zero_expr();
  return ExprBuilder::make(NodeKind::apply, {arg}, Rational(), 0, f);
}

// ---------------------------------------------------------------------------
// Operators

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return Expr::sum({a, b});
}
Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.value());
  return Expr::product({Expr(-1), a});
}
Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  return Expr::sum({a, -b});
}
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return Expr::product({a, b});
}
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw Error(Errc::domain, "division by zero");
  if (a.is_zero()) return Expr();
  return Expr::product({a, Expr::power(b, Rational(-1))});
}
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, const Rational& exponent) { return Expr::power(base, exponent); }
Expr exp(const Expr& e) { return Expr::apply(Func::exp, e); }
Expr log(const Expr& e) { return Expr::apply(Func::log, e); }
Expr sin(const Expr& e) { return Expr::apply(Func::sin, e); }
Expr cos(const Expr& e) { return Expr::apply(Func::cos, e); }
Expr tan(const Expr& e) { return Expr::apply(Func::tan, e); }
Expr sqrt(const Expr& e) { return Expr::apply(Func::sqrt, e); }

// ---------------------------------------------------------------------------
// Printing

namespace {

enum Prec { kSum = 1, kProduct = 2, kPower = 3, kAtom = 4 };

void print(std::ostream& os, const Expr& e, int parent);

std::string exponent_text(const Rational& r) {
  if (r.is_integer() && !r.is_negative()) return r.str();
  return "(" + r.str() + ")";
}

bool is_negative_term(const Expr& t) {
  if (t.is_constant()) return t.value().is_negative();
  if (t.kind() == NodeKind::product) {
    const auto& f = t.children().front();
    return f.is_constant() && f.value().is_negative();
  }
  return false;
}

void print_product(std::ostream& os, const Expr& e) {
  Rational coeff(1);
  std::vector<Expr> num;
  std::vector<Expr> den;
  for (const auto& f : e.children()) {
    if (f.is_constant()) {
      coeff = f.value();
    } else if (f.kind() == NodeKind::power && f.exponent().is_negative()) {
      den.push_back(Expr::power(f.children().front(), -f.exponent()));
    } else {
      num.push_back(f);
    }
  }
  if (coeff.is_negative()) os << '-';
  Rational mag = coeff.abs();
  bool first = true;
  if (mag.num() != 1 || num.empty()) {
    os << mag.num();
    first = false;
  }
  for (const auto& f : num) {
    if (!first) os << '*';
    print(os, f, kProduct + 1);
    first = false;
  }
  if (mag.den() != 1) den.insert(den.begin(), Expr(mag.den()));
  if (den.empty()) return;
  os << '/';
  if (den.size() == 1 && (den[0].kind() != NodeKind::product && den[0].kind() != NodeKind::sum)) {
    print(os, den[0], kPower);
    return;
  }
  os << '(';
  for (std::size_t i = 0; i < den.size(); ++i) {
    if (i) os << '*';
    print(os, den[i], kProduct + 1);
  }
  os << ')';
}

void print(std::ostream& os, const Expr& e, int parent) {
  switch (e.kind()) {
    case NodeKind::constant: {
      const auto& v = e.value();
      bool wrap = (v.is_negative() || !v.is_integer()) && parent > kSum;
      if (wrap) os << '(';
      os << v.str();
      if (wrap) os << ')';
      return;
    }
    case NodeKind::symbol:
      os << symbol_name(e.symbol_id());
      return;
    case NodeKind::apply:
      os << func_name(e.func()) << '(';
      print(os, e.children().front(), 0);
      os << ')';
      return;
    case NodeKind::power: {
      const auto& b = e.children().front();
      if (e.exponent() == Rational(1, 2)) {
        os << "sqrt(";
        print(os, b, 0);
        os << ')';
        return;
      }
      print(os, b, kAtom);
      os << '^' << exponent_text(e.exponent());
      return;
    }
    case NodeKind::product: {
      bool wrap = parent > kProduct;
      if (wrap) os << '(';
      print_product(os, e);
      if (wrap) os << ')';
      return;
    }
    case NodeKind::sum: {
      bool wrap = parent > kSum;
      if (wrap) os << '(';
      bool first = true;
      for (const auto& t : e.children()) {
        if (first) {
          print(os, t, kSum);
        } else if (is_negative_term(t)) {
          os << " - ";
          Expr m = -t;
          print(os, m, m.kind() == NodeKind::sum ? kSum + 1 : kSum);
        } else {
          os << " + ";
          print(os, t, kSum);
        }
        first = false;
      }
      if (wrap) os << ')';
      return;
    }
  }
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  print(os, *this, 0);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) {
  print(os, e, 0);
  return os;
}

// ---------------------------------------------------------------------------
// Differentiation and substitution

namespace {

// Derivation sending each bound symbol s to d[s]; unbound symbols go to 0.
class Differentiator {
 public:
  explicit Differentiator(const Bindings& d) : d_(d) {}

  Expr run(const Expr& e) {
    if (!touches(e)) return Expr();
    if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
    Expr out = compute(e);
    memo_.emplace(e.node(), out);
    return out;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::constant: return Expr();
      case NodeKind::symbol: return d_.at(e.symbol_id());
      case NodeKind::sum: {
        std::vector<Expr> parts;
        for (const auto& c : e.children()) {
          Expr d = run(c);
          if (!d.is_zero()) parts.push_back(d);
        }
        return Expr::sum(std::move(parts));
      }
      case NodeKind::product: {
        auto ch = e.children();
        std::vector<Expr> parts;
        for (std::size_t i = 0; i < ch.size(); ++i) {
          Expr d = run(ch[i]);
          if (d.is_zero()) continue;
          std::vector<Expr> f;
          f.reserve(ch.size());
          for (std::size_t j = 0; j < ch.size(); ++j) f.push_back(j == i ? d : ch[j]);
          parts.push_back(Expr::product(std::move(f)));
        }
        return Expr::sum(std::move(parts));
      }
      case NodeKind::power: {
        const auto& b = e.children().front();
        const auto& p = e.exponent();
        return Expr::product({Expr(p), Expr::power(b, p - Rational(1)), run(b)});
      }
      case NodeKind::apply: {
        const auto& a = e.children().front();
        Expr da = run(a);
        switch (e.func()) {
          case Func::exp: return e * da;
          case Func::log: return da / a;
          case Func::sin: return cos(a) * da;
          case Func::cos: return -(sin(a) * da);
          case Func::tan: return (Expr(1) + pow(e, Rational(2))) * da;
          case Func::sqrt: return da / (Expr(2) * e);
        }
      }
    }
    return Expr();
  }

  bool touches(const Expr& e) const {
    if (d_.size() == 1) return e.depends_on(d_.begin()->first);
    for (auto s : e.free_symbols()) {
      if (d_.count(s)) return true;
    }
    return false;
  }

  const Bindings& d_;
  std::unordered_map<const Node*, Expr> memo_;
};

class Substituter {
 public:
  explicit Substituter(const Bindings& b) : b_(b) {}

  Expr run(const Expr& e) {
    bool touched = false;
    for (auto s : e.free_symbols()) {
      if (b_.count(s)) {
        touched = true;
        break;
      }
    }
    if (!touched) return e;
    if (auto it = memo_.find(e.node()); it != memo_.end()) return it->second;
    Expr out = compute(e);
    memo_.emplace(e.node(), out);
    return out;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.kind()) {
      case NodeKind::symbol: return b_.at(e.symbol_id());
      case NodeKind::sum:
      case NodeKind::product: {
        std::vector<Expr> parts;
        for (const auto& c : e.children()) parts.push_back(run(c));
        return e.kind() == NodeKind::sum ? Expr::sum(std::move(parts))
                                         : Expr::product(std::move(parts));
      }
      case NodeKind::power: return Expr::power(run(e.children().front()), e.exponent());
      case NodeKind::apply: return Expr::apply(e.func(), run(e.children().front()));
      default: return e;
    }
  }

  const Bindings& b_;
  std::unordered_map<const Node*, Expr> memo_;
};

}  // namespace

Expr partial(const Expr& e, SymbolId s) {
  Bindings d{{s, Expr(1)}};
  return Differentiator(d).run(e);
}

Expr derive(const Expr& e, const Bindings& derivatives) {
  if (derivatives.empty()) return Expr();
  return Differentiator(derivatives).run(e);
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  return Substituter(bindings).run(e);
}

// ---------------------------------------------------------------------------
// Evaluation

EvalPoint::EvalPoint(std::initializer_list<std::pair<std::string_view, double>> values) {
  for (const auto& [name, v] : values) set(name, v);
}

double EvalPoint::at(SymbolId id) const {
  auto it = values_.find(id);
  if (it == values_.end()) {
    throw Error(Errc::domain, "unbound symbol '" + symbol_name(id) + "'");
  }
  return it->second;
}

double evaluate(const Expr& e, const EvalPoint& point) {
  Program program(std::span<const Expr>(&e, 1));
  std::vector<double> in;
  in.reserve(program.inputs().size());
  for (auto id : program.inputs()) in.push_back(point.at(id));
  double out = 0;
  if (!program.run(in, std::span<double>(&out, 1))) {
    throw Error(Errc::domain, "singular evaluation of " + e.str());
  }
  return out;
}

}  // namespace jetsym
