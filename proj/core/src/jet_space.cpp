#include "jetsym/jet_space.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>

#include "jetsym/error.hpp"

namespace jetsym {

int MultiIndex::order() const noexcept {
  int s = 0;
  for (int c : j_) s += c;
  return s;
}

MultiIndex MultiIndex::plus(std::size_t i) const {
  MultiIndex r = *this;
  ++r.j_.at(i);
  return r;
}

std::optional<MultiIndex> MultiIndex::minus(std::size_t i) const {
  if (j_.at(i) == 0) return std::nullopt;
  MultiIndex r = *this;
  --r.j_[i];
  return r;
}

bool MultiIndex::contains(const MultiIndex& other) const {
  for (std::size_t i = 0; i < j_.size(); ++i) {
    if (j_[i] < other.j_.at(i)) return false;
  }
  return true;
}

MultiIndex MultiIndex::difference(const MultiIndex& other) const {
  MultiIndex r = *this;
  for (std::size_t i = 0; i < j_.size(); ++i) r.j_[i] -= other.j_.at(i);
  return r;
}

int MultiIndex::last_direction() const noexcept {
  for (int i = static_cast<int>(j_.size()) - 1; i >= 0; --i) {
    if (j_[i] > 0) return i;
  }
  return -1;
}

std::vector<int> MultiIndex::path() const {
  std::vector<int> p;
  for (std::size_t i = 0; i < j_.size(); ++i) {
    for (int c = 0; c < j_[i]; ++c) p.push_back(static_cast<int>(i));
  }
  return p;
}

std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
  if (auto c = a.order() <=> b.order(); c != 0) return c;
  // x-heavier first: compare counts in reverse sense
  for (std::size_t i = 0; i < std::min(a.j_.size(), b.j_.size()); ++i) {
    if (a.j_[i] != b.j_[i]) return b.j_[i] <=> a.j_[i];
  }
  return a.j_.size() <=> b.j_.size();
}

// ---------------------------------------------------------------------------

struct JetSpace::Impl {
  std::vector<std::string> independent;
  std::vector<std::string> dependent;
  std::vector<std::string> parameters;
  int max_order = 0;
  std::vector<SymbolId> x_ids;
  std::vector<std::map<MultiIndex, SymbolId>> by_index;  // per dependent
  std::unordered_map<SymbolId, JetCoordinate> jets;
  std::unordered_map<SymbolId, int> x_index;
  std::set<SymbolId> params;
  std::vector<MultiIndex> indices;  // graded, |J| <= max_order
  SymbolTable table;

  std::optional<MultiIndex> parse_suffix(std::string_view suffix) const;
};

namespace {

bool valid_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  static const std::set<std::string> reserved = {"exp", "log", "sin", "cos", "tan", "sqrt", "diff"};
  return !reserved.count(s);
}

void enumerate(int n, int order, std::vector<int>& cur, std::size_t pos,
               std::vector<MultiIndex>& out) {
  if (pos + 1 == static_cast<std::size_t>(n)) {
    cur[pos] = order;
    out.emplace_back(cur);
    return;
  }
  for (int c = order; c >= 0; --c) {
    cur[pos] = c;
    enumerate(n, order - c, cur, pos + 1, out);
  }
}

std::vector<MultiIndex> indices_of_order(int n, int order) {
  std::vector<MultiIndex> out;
  std::vector<int> cur(static_cast<std::size_t>(n), 0);
  enumerate(n, order, cur, 0, out);
  return out;
}

}  // namespace

std::optional<MultiIndex> JetSpace::Impl::parse_suffix(std::string_view suffix) const {
  // all ways to split the suffix into independent names; they must agree
  std::set<std::vector<int>> results;
  std::vector<int> counts(independent.size(), 0);
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (results.size() > 1) return;
    if (pos == suffix.size()) {
      results.insert(counts);
      return;
    }
    for (std::size_t i = 0; i < independent.size(); ++i) {
      const auto& name = independent[i];
      if (suffix.substr(pos, name.size()) == name) {
        ++counts[i];
        self(self, pos + name.size());
        --counts[i];
      }
    }
  };
  rec(rec, 0);
  if (results.size() != 1) return std::nullopt;
  return MultiIndex(*results.begin());
}

JetSpace::JetSpace(std::vector<std::string> independent, std::vector<std::string> dependent,
                   int max_order, std::vector<std::string> parameters) {
  if (independent.empty()) throw Error(Errc::invalid_argument, "at least one independent variable");
  if (dependent.empty()) throw Error(Errc::invalid_argument, "at least one dependent variable");
  if (max_order < 0) throw Error(Errc::invalid_argument, "max_order must be >= 0");
  std::set<std::string> seen;
  for (const auto* group : {&independent, &dependent, &parameters}) {
    for (const auto& s : *group) {
      if (!valid_identifier(s)) throw Error(Errc::invalid_argument, "invalid variable name '" + s + "'");
      if (!seen.insert(s).second) throw Error(Errc::invalid_argument, "duplicate variable name '" + s + "'");
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->independent = std::move(independent);
  impl->dependent = std::move(dependent);
  impl->parameters = std::move(parameters);
  impl->max_order = max_order;
  const int n = static_cast<int>(impl->independent.size());
  for (int i = 0; i < n; ++i) {
    SymbolId id = intern(impl->independent[i]);
    impl->x_ids.push_back(id);
    impl->x_index[id] = i;
    impl->table.declare(impl->independent[i]);
  }
  for (const auto& p : impl->parameters) {
    impl->params.insert(intern(p));
    impl->table.declare(p);
  }
  for (int k = 0; k <= max_order; ++k) {
    auto level = indices_of_order(n, k);
    impl->indices.insert(impl->indices.end(), level.begin(), level.end());
  }
  impl->by_index.resize(impl->dependent.size());
  for (std::size_t a = 0; a < impl->dependent.size(); ++a) {
    for (const auto& J : impl->indices) {
      std::string name = impl->dependent[a];
      if (!J.is_zero()) {
        name += '_';
        for (int i = 0; i < n; ++i) {
          for (int c = 0; c < J[i]; ++c) name += impl->independent[i];
        }
      }
      if (seen.count(name) && !J.is_zero()) {
        throw Error(Errc::invalid_argument, "jet coordinate '" + name + "' collides with a declared name");
      }
      SymbolId id = intern(name);
      impl->by_index[a][J] = id;
      impl->jets[id] = JetCoordinate{static_cast<int>(a), J};
    }
    impl->table.declare(impl->dependent[a]);
  }
  const Impl* raw = impl.get();
  impl->table.set_resolvers(
      [raw](std::string_view name) -> std::optional<SymbolId> {
        for (std::size_t a = 0; a < raw->dependent.size(); ++a) {
          const auto& d = raw->dependent[a];
          if (name.size() > d.size() + 1 && name.substr(0, d.size()) == d && name[d.size()] == '_') {
            auto J = raw->parse_suffix(name.substr(d.size() + 1));
            if (!J) continue;
            auto it = raw->by_index[a].find(*J);
            if (it != raw->by_index[a].end()) return it->second;
          }
        }
        return std::nullopt;
      },
      [raw](std::string_view dep, const SymbolTable::DerivativeSpec& spec) -> std::optional<SymbolId> {
        auto ait = std::find(raw->dependent.begin(), raw->dependent.end(), dep);
        if (ait == raw->dependent.end()) return std::nullopt;
        std::vector<int> counts(raw->independent.size(), 0);
        for (const auto& [var, k] : spec) {
          auto it = std::find(raw->independent.begin(), raw->independent.end(), var);
          if (it == raw->independent.end() || k < 0) return std::nullopt;
          counts[static_cast<std::size_t>(it - raw->independent.begin())] += k;
        }
        auto a = static_cast<std::size_t>(ait - raw->dependent.begin());
        auto it = raw->by_index[a].find(MultiIndex(counts));
        if (it == raw->by_index[a].end()) return std::nullopt;
        return it->second;
      });
  impl_ = std::move(impl);
}

int JetSpace::n() const noexcept { return static_cast<int>(impl_->independent.size()); }
int JetSpace::m() const noexcept { return static_cast<int>(impl_->dependent.size()); }
int JetSpace::max_order() const noexcept { return impl_->max_order; }
const std::vector<std::string>& JetSpace::independent_names() const noexcept { return impl_->independent; }
const std::vector<std::string>& JetSpace::dependent_names() const noexcept { return impl_->dependent; }
const std::vector<std::string>& JetSpace::parameter_names() const noexcept { return impl_->parameters; }

JetSpace JetSpace::with_max_order(int k) const {
  if (k == max_order()) return *this;
  return JetSpace(impl_->independent, impl_->dependent, k, impl_->parameters);
}

SymbolId JetSpace::independent(int i) const { return impl_->x_ids.at(static_cast<std::size_t>(i)); }

SymbolId JetSpace::coordinate(int a, const MultiIndex& J) const {
  if (a < 0 || a >= m()) throw Error(Errc::invalid_argument, "dependent index out of range");
  if (J.size() != static_cast<std::size_t>(n())) throw Error(Errc::invalid_argument, "multi-index has wrong length");
  if (J.order() > max_order()) {
    throw Error(Errc::order_overflow, "coordinate " + coordinate_name(a, J) + " exceeds max_order " +
                                          std::to_string(max_order()));
  }
  return impl_->by_index[static_cast<std::size_t>(a)].at(J);
}

std::string JetSpace::coordinate_name(int a, const MultiIndex& J) const {
  std::string name = impl_->dependent.at(static_cast<std::size_t>(a));
  if (J.is_zero()) return name;
  name += '_';
  for (int i = 0; i < n(); ++i) {
    for (int c = 0; c < J[i]; ++c) name += impl_->independent[i];
  }
  return name;
}

Expr JetSpace::u_order(int a, int order) const {
  if (n() != 1) throw Error(Errc::invalid_argument, "u_order needs one independent variable");
  return u(a, MultiIndex{order});
}

std::optional<int> JetSpace::independent_index(SymbolId s) const {
  auto it = impl_->x_index.find(s);
  if (it == impl_->x_index.end()) return std::nullopt;
  return it->second;
}

std::optional<JetCoordinate> JetSpace::jet(SymbolId s) const {
  auto it = impl_->jets.find(s);
  if (it == impl_->jets.end()) return std::nullopt;
  return it->second;
}

bool JetSpace::is_parameter(SymbolId s) const { return impl_->params.count(s) > 0; }

std::vector<MultiIndex> JetSpace::multi_indices(int order) const { return indices_of_order(n(), order); }

std::vector<MultiIndex> JetSpace::multi_indices_upto(int order) const {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= order; ++k) {
    auto level = indices_of_order(n(), k);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<SymbolId> JetSpace::coordinates(int order) const {
  if (order > max_order()) throw Error(Errc::order_overflow, "order exceeds max_order");
  std::vector<SymbolId> out = impl_->x_ids;
  for (int a = 0; a < m(); ++a) {
    for (const auto& J : multi_indices_upto(order)) out.push_back(coordinate(a, J));
  }
  return out;
}

int JetSpace::order_of(const Expr& e) const {
  int best = -1;
  for (auto s : e.free_symbols()) {
    auto it = impl_->jets.find(s);
    if (it != impl_->jets.end()) best = std::max(best, it->second.index.order());
  }
  return best;
}

const SymbolTable& JetSpace::symbols() const { return impl_->table; }

Expr JetSpace::parse(std::string_view text) const { return jetsym::parse(text, impl_->table); }

// ---------------------------------------------------------------------------

Expr total_derivative(const Expr& e, int i, const JetSpace& S) {
  Bindings d;
  const SymbolId xi = S.independent(i);
  for (auto s : e.free_symbols()) {
    if (s == xi) {
      d.emplace(s, Expr(1));
      continue;
    }
    auto c = S.jet(s);
    if (!c) continue;
    if (c->index.order() >= S.max_order()) {
      throw Error(Errc::order_overflow, "total derivative of an expression involving " +
                                            symbol_name(s) + " needs order " +
                                            std::to_string(c->index.order() + 1));
    }
    d.emplace(s, S.u(c->dependent, c->index.plus(static_cast<std::size_t>(i))));
  }
  return derive(e, d);
}

Expr total_derivative(const Expr& e, const MultiIndex& J, const JetSpace& S) {
  Expr r = e;
  for (int i : J.path()) r = total_derivative(r, i, S);
  return r;
}

Expr total_derivative_n(const Expr& e, int times, const JetSpace& S) {
  Expr r = e;
  for (int t = 0; t < times; ++t) r = total_derivative(r, 0, S);
  return r;
}

std::vector<ContactForm> contact_forms(const JetSpace& S) {
  std::vector<ContactForm> out;
  for (int a = 0; a < S.m(); ++a) {
    for (const auto& J : S.multi_indices_upto(S.max_order() - 1)) {
      ContactForm w;
      w.dependent = a;
      w.index = J;
      w.coefficients.emplace_back(S.coordinate(a, J), Expr(1));
      for (int i = 0; i < S.n(); ++i) {
        w.coefficients.emplace_back(S.independent(i), -S.u(a, J.plus(static_cast<std::size_t>(i))));
      }
      out.push_back(std::move(w));
    }
  }
  return out;
}

}  // namespace jetsym
