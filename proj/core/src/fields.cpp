#include "jetsym/fields.hpp"

#include "jetsym/error.hpp"

namespace jetsym {

VectorField VectorField::zero(const JetSpace& S) {
  return VectorField{std::vector<Expr>(static_cast<std::size_t>(S.n())),
                     std::vector<Expr>(static_cast<std::size_t>(S.m()))};
}

VectorField VectorField::vertical(std::vector<Expr> phi, const JetSpace& S) {
  VectorField v{std::vector<Expr>(static_cast<std::size_t>(S.n())), std::move(phi)};
  v.check_shape(S);
  return v;
}

bool VectorField::is_vertical() const {
  for (const auto& e : xi) {
    if (!e.is_zero()) return false;
  }
  return true;
}

bool VectorField::is_point(const JetSpace& S) const {
  for (const auto* group : {&xi, &phi}) {
    for (const auto& e : *group) {
      if (S.order_of(e) > 0) return false;
    }
  }
  return true;
}

void VectorField::check_shape(const JetSpace& S) const {
  if (xi.size() != static_cast<std::size_t>(S.n()) || phi.size() != static_cast<std::size_t>(S.m())) {
    throw Error(Errc::size_mismatch, "vector field has " + std::to_string(xi.size()) + "+" +
                                         std::to_string(phi.size()) + " components, space needs " +
                                         std::to_string(S.n()) + "+" + std::to_string(S.m()));
  }
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  if (a.xi.size() != b.xi.size() || a.phi.size() != b.phi.size()) {
    throw Error(Errc::size_mismatch, "vector fields of different shapes");
  }
  VectorField r = a;
  for (std::size_t i = 0; i < r.xi.size(); ++i) r.xi[i] += b.xi[i];
  for (std::size_t i = 0; i < r.phi.size(); ++i) r.phi[i] += b.phi[i];
  return r;
}

VectorField operator*(const Expr& s, const VectorField& v) {
  VectorField r = v;
  for (auto& e : r.xi) e = s * e;
  for (auto& e : r.phi) e = s * e;
  return r;
}

// ---------------------------------------------------------------------------

JetField::JetField(std::map<SymbolId, Expr> components) {
  for (auto& [s, e] : components) {
    if (!e.is_zero()) c_.emplace(s, std::move(e));
  }
  for (const auto& [s, e] : c_) bindings_.emplace(s, e);
}

Expr JetField::coefficient(SymbolId s) const {
  auto it = c_.find(s);
  return it == c_.end() ? Expr() : it->second;
}

JetField commutator(const JetField& a, const JetField& b) {
  std::map<SymbolId, Expr> out;
  for (const auto& [s, e] : b.components()) out[s] += a.apply(e);
  for (const auto& [s, e] : a.components()) out[s] -= b.apply(e);
  return JetField(std::move(out));
}

JetField operator+(const JetField& a, const JetField& b) {
  auto c = a.components();
  for (const auto& [s, e] : b.components()) c[s] += e;
  return JetField(std::move(c));
}

JetField operator-(const JetField& a, const JetField& b) {
  auto c = a.components();
  for (const auto& [s, e] : b.components()) c[s] -= e;
  return JetField(std::move(c));
}

JetField operator*(const Expr& s, const JetField& v) {
  std::map<SymbolId, Expr> c;
  for (const auto& [k, e] : v.components()) c[k] = s * e;
  return JetField(std::move(c));
}

std::vector<std::pair<Expr, Expr>> coefficient_pairs(const JetField& a, const JetField& b) {
  std::map<SymbolId, std::pair<Expr, Expr>> m;
  for (const auto& [s, e] : a.components()) m[s].first = e;
  for (const auto& [s, e] : b.components()) m[s].second = e;
  std::vector<std::pair<Expr, Expr>> out;
  out.reserve(m.size());
  for (auto& [s, p] : m) out.push_back(std::move(p));
  return out;
}

JetField as_jet_field(const VectorField& v, const JetSpace& S) {
  v.check_shape(S);
  std::map<SymbolId, Expr> c;
  for (int i = 0; i < S.n(); ++i) c[S.independent(i)] = v.xi[static_cast<std::size_t>(i)];
  for (int a = 0; a < S.m(); ++a) c[S.coordinate(a, MultiIndex(static_cast<std::size_t>(S.n())))] =
      v.phi[static_cast<std::size_t>(a)];
  return JetField(std::move(c));
}

VectorField as_vector_field(const JetField& v, const JetSpace& S) {
  VectorField r = VectorField::zero(S);
  for (const auto& [s, e] : v.components()) {
    if (auto i = S.independent_index(s)) {
      r.xi[static_cast<std::size_t>(*i)] = e;
    } else if (auto c = S.jet(s); c && c->index.is_zero()) {
      r.phi[static_cast<std::size_t>(c->dependent)] = e;
    } else {
      throw Error(Errc::invalid_argument, "operator has a component along " + symbol_name(s) +
                                              ", not a vector field on M");
    }
  }
  return r;
}

VectorField commutator(const VectorField& a, const VectorField& b, const JetSpace& S) {
  return as_vector_field(commutator(as_jet_field(a, S), as_jet_field(b, S)), S);
}

const char* to_string(TwistKind k) noexcept {
  switch (k) {
    case TwistKind::standard: return "standard";
    case TwistKind::lambda: return "lambda";
    case TwistKind::mu: return "mu";
    case TwistKind::sigma: return "sigma";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ProlongedField::ProlongedField(VectorField base, int order, TwistKind twist, JetSpace space)
    : base_(std::move(base)), order_(order), twist_(twist), space_(std::move(space)) {
  base_.check_shape(space_);
  const MultiIndex zero(static_cast<std::size_t>(space_.n()));
  for (int a = 0; a < space_.m(); ++a) psi_[{a, zero}] = base_.phi[static_cast<std::size_t>(a)];
}

const Expr& ProlongedField::psi(int a, const MultiIndex& J) const {
  auto it = psi_.find({a, J});
  if (it == psi_.end()) {
    throw Error(Errc::order_overflow, "no coefficient for " + space_.coordinate_name(a, J) +
                                          " in a prolongation of order " + std::to_string(order_));
  }
  return it->second;
}

void ProlongedField::set_psi(int a, const MultiIndex& J, Expr value) { psi_[{a, J}] = std::move(value); }

JetField ProlongedField::as_jet_field() const {
  std::map<SymbolId, Expr> c;
  for (int i = 0; i < space_.n(); ++i) c[space_.independent(i)] = base_.xi[static_cast<std::size_t>(i)];
  for (const auto& [key, e] : psi_) c[space_.coordinate(key.first, key.second)] = e;
  return JetField(std::move(c));
}

ProlongedField ProlongedField::truncate(int k) const {
  if (k > order_) throw Error(Errc::order_overflow, "cannot truncate to a higher order");
  ProlongedField r(base_, k, twist_, space_);
  for (const auto& [key, e] : psi_) {
    if (key.second.order() <= k) r.psi_[key] = e;
  }
  return r;
}

std::vector<std::pair<Expr, Expr>> coefficient_pairs(const ProlongedField& a, const ProlongedField& b) {
  return coefficient_pairs(a.as_jet_field(), b.as_jet_field());
}

std::vector<Expr> annihilates_contact(const ProlongedField& V) {
  const JetSpace& S = V.space();
  const int k = V.order();
  std::vector<Expr> out;
  if (k < 1) return out;
  const auto coords = S.coordinates(k);
  std::vector<Expr> xi = V.base().xi;
  for (int a = 0; a < S.m(); ++a) {
    for (const auto& J : S.multi_indices_upto(k - 1)) {
      const Expr& psiJ = V.psi(a, J);
      // theta_s for every coordinate s of J^k
      std::map<SymbolId, Expr> theta;
      for (SymbolId s : coords) {
        Expr t = partial(psiJ, s);
        for (int i = 0; i < S.n(); ++i) {
          Expr dxi = partial(xi[static_cast<std::size_t>(i)], s);
          if (!dxi.is_zero()) t -= S.u(a, J.plus(static_cast<std::size_t>(i))) * dxi;
        }
        if (auto idx = S.independent_index(s)) t -= V.psi(a, J.plus(static_cast<std::size_t>(*idx)));
        theta[s] = t;
      }
      for (int b = 0; b < S.m(); ++b) {
        for (const auto& K : S.multi_indices(k)) out.push_back(theta[S.coordinate(b, K)]);
      }
      for (int i = 0; i < S.n(); ++i) {
        Expr r = theta[S.independent(i)];
        for (int b = 0; b < S.m(); ++b) {
          for (const auto& K : S.multi_indices_upto(k - 1)) {
            const Expr& tk = theta[S.coordinate(b, K)];
            if (!tk.is_zero()) r += tk * S.u(b, K.plus(static_cast<std::size_t>(i)));
          }
        }
        out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace jetsym
