#include "jetsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

DiffEq::DiffEq(JetSpace space, std::vector<SolvedEntry> solved, std::vector<Expr> residual)
    : space_(std::move(space)), closure_(space_), solved_(std::move(solved)), residual_(std::move(residual)) {
  if (solved_.empty()) throw Error(Errc::invalid_argument, "an equation needs at least one solved entry");
  std::set<std::pair<int, std::vector<int>>> leads;
  for (const auto& e : solved_) {
    if (e.dependent < 0 || e.dependent >= space_.m()) throw Error(Errc::invalid_argument, "solved entry names an unknown dependent variable");
    if (e.index.size() != static_cast<std::size_t>(space_.n())) throw Error(Errc::invalid_argument, "solved entry has a malformed multi-index");
    if (e.index.order() < 1) throw Error(Errc::invalid_argument, "solved entries must be derivatives");
    if (e.index.order() > space_.max_order()) throw Error(Errc::order_overflow, "solved entry exceeds max_order");
    if (!leads.insert({e.dependent, e.index.counts()}).second) throw Error(Errc::invalid_argument, "duplicate solved entry");
    order_ = std::max(order_, e.index.order());
  }
  closure_ = space_.with_max_order(space_.max_order() + order_ + 1);
  for (const auto& e : solved_) {
    for (auto s : e.rhs.free_symbols()) {
      if (principal_entry(s)) {
        throw Error(Errc::invalid_argument, "right-hand side for " + space_.coordinate_name(e.dependent, e.index) +
                                                " involves the principal coordinate " + symbol_name(s));
      }
    }
  }
  if (residual_.empty()) {
    for (const auto& e : solved_) residual_.push_back(space_.u(e.dependent, e.index) - e.rhs);
  }
}

std::optional<std::size_t> DiffEq::principal_entry(SymbolId s) const {
  auto c = closure_.jet(s);
  if (!c) return std::nullopt;
  for (std::size_t i = 0; i < solved_.size(); ++i) {
    if (solved_[i].dependent == c->dependent && c->index.contains(solved_[i].index)) return i;
  }
  return std::nullopt;
}

Verdict DiffEq::self_consistency(const Oracle& oracle) const {
  std::vector<Expr> r;
  for (const auto& F : residual_) r.push_back(restrict_to(F, *this));
  return oracle.all_zero(r);
}

namespace {

class Restrictor {
 public:
  explicit Restrictor(const DiffEq& eq) : eq_(eq) {}

  Expr run(const Expr& e) {
    Bindings b;
    for (auto s : e.free_symbols()) {
      if (eq_.principal_entry(s)) b.emplace(s, value(s));
    }
    return substitute(e, b);
  }

 private:
  Expr value(SymbolId s) {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    const auto& S = eq_.closure();
    const auto c = *S.jet(s);
    const auto& entry = eq_.solved()[*eq_.principal_entry(s)];
    Expr out;
    if (c.index == entry.index) {
      out = run(entry.rhs);
    } else {
      const MultiIndex rest = c.index.difference(entry.index);
      const int i = rest.last_direction();
      const SymbolId prev = S.coordinate(c.dependent, *c.index.minus(static_cast<std::size_t>(i)));
      Expr d;
      try {
        d = total_derivative(value(prev), i, S);
      } catch (const Error& err) {
        if (err.code() != Errc::order_overflow) throw;
        throw Error(Errc::needs_unavailable_derivative,
                    "restricting " + symbol_name(s) + " needs derivatives beyond the available order");
      }
      out = run(d);
    }
    memo_.emplace(s, out);
    return out;
  }

  const DiffEq& eq_;
  std::unordered_map<SymbolId, Expr> memo_;
};

}  // namespace

Expr restrict_to(const Expr& e, const DiffEq& eq) {
  const auto& S = eq.closure();
  for (auto s : e.free_symbols()) {
    if (S.jet(s) || S.independent_index(s) || S.is_parameter(s)) continue;
    // jet-style names past the closure order cannot be restricted
    const auto& name = symbol_name(s);
    for (const auto& d : S.dependent_names()) {
      if (name.size() > d.size() + 1 && name.compare(0, d.size() + 1, d + "_") == 0) {
        throw Error(Errc::needs_unavailable_derivative, "coordinate " + name + " is beyond the derivable closure");
      }
    }
  }
  return Restrictor(eq).run(e);
}

std::vector<Expr> symmetry_residual(const DiffEq& eq, const ProlongedField& V, const ResidualOptions& options) {
  if (V.order() < eq.order()) {
    throw Error(Errc::invalid_argument, "prolongation order " + std::to_string(V.order()) +
                                            " is below the equation order " + std::to_string(eq.order()));
  }
  const JetSpace& S = V.space();
  if (S.n() != eq.space().n() || S.m() != eq.space().m()) {
    throw Error(Errc::size_mismatch, "field and equation live on different spaces");
  }
  JetField W = V.as_jet_field();
  std::vector<Expr> targets = eq.residuals();
  if (options.prolonged) {
    std::vector<Expr> level = eq.residuals();
    for (int j = 1; j <= V.order() - eq.order(); ++j) {
      std::vector<Expr> next;
      for (const auto& F : level) {
        for (int i = 0; i < S.n(); ++i) next.push_back(total_derivative(F, i, eq.closure()));
      }
      targets.insert(targets.end(), next.begin(), next.end());
      level = std::move(next);
    }
  }
  std::vector<Expr> out;
  out.reserve(targets.size());
  for (const auto& F : targets) {
    Expr r = W.apply(F);
    out.push_back(options.restricted ? restrict_to(r, eq) : r);
  }
  return out;
}

Verdict check_symmetry(const DiffEq& eq, const ProlongedField& V, const Oracle& oracle, const ResidualOptions& options) {
  return oracle.all_zero(symmetry_residual(eq, V, options));
}

// ---------------------------------------------------------------------------

InvolutionResult check_involution(const std::vector<JetField>& fields, const InvolutionOptions& options) {
  const std::size_t r = fields.size();
  if (r == 0) throw Error(Errc::invalid_argument, "check_involution needs at least one field");
  InvolutiveSystem sys;
  sys.fields = fields;
  sys.structure.assign(r, std::vector<std::vector<Expr>>(r, std::vector<Expr>(r)));
  if (r == 1) return sys;

  std::vector<std::pair<int, int>> pairs;
  std::vector<JetField> brackets;
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a + 1; b < r; ++b) {
      pairs.emplace_back(static_cast<int>(a), static_cast<int>(b));
      brackets.push_back(commutator(fields[a], fields[b]));
    }
  }
  std::set<SymbolId> keyset;
  std::set<SymbolId> varset;
  for (const auto& f : fields) {
    for (const auto& [s, e] : f.components()) {
      keyset.insert(s);
      for (auto v : e.free_symbols()) varset.insert(v);
    }
  }
  for (const auto& c : brackets) {
    for (const auto& [s, e] : c.components()) keyset.insert(s);
  }
  const std::vector<SymbolId> keys(keyset.begin(), keyset.end());
  std::vector<Expr> vars;
  for (auto v : varset) vars.push_back(Expr::symbol(v));

  std::vector<Expr> basis = options.fit_basis.empty() ? monomials(vars, options.fit_degree) : options.fit_basis;
  const int wanted = std::max<int>(40, static_cast<int>(6 * basis.size()));

  // flat list: field coefficients, then bracket coefficients
  std::vector<Expr> flat;
  for (const auto& f : fields) {
    for (auto k : keys) flat.push_back(f.coefficient(k));
  }
  for (const auto& c : brackets) {
    for (auto k : keys) flat.push_back(c.coefficient(k));
  }
  auto points = options.oracle.sample_points(flat, wanted);
  Program prog(flat);
  std::vector<double> in(prog.inputs().size()), out(flat.size());
  const std::size_t K = keys.size();

  std::vector<EvalPoint> good;
  // values[pair][g] over good points
  std::vector<std::vector<std::vector<double>>> values(pairs.size(), std::vector<std::vector<double>>(r));
  int degenerate = 0;
  for (const auto& p : points) {
    for (std::size_t s = 0; s < in.size(); ++s) in[s] = p.at(prog.inputs()[s]);
    if (!prog.run(in, out)) continue;
    DenseMatrix M(K, r);
    for (std::size_t g = 0; g < r; ++g) {
      for (std::size_t k = 0; k < K; ++k) M(k, g) = out[g * K + k];
    }
    int rank = 0;
    {
      std::vector<double> zero(K, 0.0);
      least_squares(M, zero, nullptr, &rank);
    }
    if (rank < static_cast<int>(r)) {
      ++degenerate;
      continue;
    }
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      std::vector<double> c(K);
      double cn = 0;
      for (std::size_t k = 0; k < K; ++k) {
        c[k] = out[(r + q) * K + k];
        cn = std::max(cn, std::abs(c[k]));
      }
      double res = 0;
      auto f = least_squares(M, c, &res, nullptr);
      if (res > 1e-7 * (1 + cn)) {
        InvolutionFailure fail;
        fail.alpha = pairs[q].first;
        fail.beta = pairs[q].second;
        fail.reason = "commutator is not in the span of the fields";
        Witness w;
        for (const auto& [id, v] : p.values()) w.point[symbol_name(id)] = v;
        w.lhs = res;
        w.index = q;
        fail.witness = w;
        return fail;
      }
      for (std::size_t g = 0; g < r; ++g) values[q][g].push_back(f[g]);
    }
    good.push_back(p);
  }
  if (degenerate * 2 > static_cast<int>(points.size())) {
    throw Error(Errc::degenerate_distribution, "the fields are linearly dependent at " + std::to_string(degenerate) +
                                                   " of " + std::to_string(points.size()) + " sample points");
  }
  std::vector<ExprPair> cert;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [a, b] = pairs[q];
    std::vector<Expr> f(r);
    for (std::size_t g = 0; g < r; ++g) {
      double vmax = 0;
      for (double v : values[q][g]) vmax = std::max(vmax, std::abs(v));
      if (vmax < 1e-10) continue;
      auto e = fit_function(good, values[q][g], basis);
      if (!e) {
        InvolutionFailure fail;
        fail.alpha = a;
        fail.beta = b;
        fail.reason = "could not fit structure function f^" + std::to_string(g + 1) + " from the ansatz";
        return fail;
      }
      f[g] = *e;
    }
    JetField combo;
    for (std::size_t g = 0; g < r; ++g) {
      if (!f[g].is_zero()) combo = combo + f[g] * fields[g];
    }
    for (auto& pr : coefficient_pairs(brackets[q], combo)) cert.push_back(std::move(pr));
    for (std::size_t g = 0; g < r; ++g) {
      sys.structure[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)][g] = f[g];
      sys.structure[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)][g] = -f[g];
    }
  }
  sys.certificate = options.oracle.all_equal(cert);
  if (!sys.certificate.holds) {
    InvolutionFailure fail;
    fail.alpha = pairs[0].first;
    fail.beta = pairs[0].second;
    fail.witness = sys.certificate.witness;
    fail.reason = "fitted structure functions did not certify";
    return fail;
  }
  return sys;
}

InvolutionResult check_involution(const std::vector<VectorField>& fields, const JetSpace& S,
                                  const InvolutionOptions& options) {
  std::vector<JetField> jf;
  for (const auto& f : fields) jf.push_back(as_jet_field(f, S));
  return check_involution(jf, options);
}

// ---------------------------------------------------------------------------

namespace {

struct Unknown {
  std::size_t component;
  Expr basis;
};

VectorField assemble(const std::vector<Unknown>& unknowns, const std::vector<Expr>& coeffs, const JetSpace& S) {
  VectorField v = VectorField::zero(S);
  const std::size_t n = static_cast<std::size_t>(S.n());
  for (std::size_t j = 0; j < unknowns.size(); ++j) {
    if (coeffs[j].is_zero()) continue;
    const auto c = unknowns[j].component;
    Expr& slot = c < n ? v.xi[c] : v.phi[c - n];
    slot += coeffs[j] * unknowns[j].basis;
  }
  return v;
}

}  // namespace

AnsatzSolution solve_determining_ansatz(const DiffEq& eq, const AnsatzProblem& problem, const TwistData& twist,
                                        const AnsatzOptions& options) {
  if (std::holds_alternative<SigmaTwist>(twist)) {
    throw Error(Errc::invalid_argument, "the ansatz solver finds single fields; sigma twists couple a field set");
  }
  const JetSpace& S = eq.space();
  check_twist_domain(twist, S);
  const std::size_t comps = static_cast<std::size_t>(S.n() + S.m());
  if (!problem.per_component.empty() && problem.per_component.size() != comps) {
    throw Error(Errc::size_mismatch, "per-component ansatz needs n + m bases");
  }
  std::vector<Unknown> unknowns;
  for (std::size_t c = 0; c < comps; ++c) {
    const auto& b = problem.per_component.empty() ? problem.basis : problem.per_component[c];
    for (const auto& e : b) {
      if (S.order_of(e) > 0) throw Error(Errc::invalid_argument, "ansatz function " + e.str() + " is not defined on M");
      unknowns.push_back({c, e});
    }
  }
  AnsatzSolution sol;
  sol.unknowns = static_cast<int>(unknowns.size());
  if (unknowns.empty()) return sol;

  const int N = eq.order();
  std::vector<std::vector<Expr>> R;
  for (std::size_t j = 0; j < unknowns.size(); ++j) {
    std::vector<Expr> unit(unknowns.size());
    unit[j] = Expr(1);
    VectorField e = assemble(unknowns, unit, S);
    MuOptions mo;
    mo.oracle = options.oracle;
    R.push_back(symmetry_residual(eq, prolong(e, twist, N, S, mo)));
  }
  const std::size_t E = R.front().size();
  std::vector<Expr> flat;
  for (const auto& r : R) flat.insert(flat.end(), r.begin(), r.end());
  Program prog(flat);
  std::vector<double> in(prog.inputs().size()), out(flat.size());

  const int count = std::max<int>(20, 3 * static_cast<int>(unknowns.size()));
  NullSpace ns;
  bool settled = false;
  for (int attempt = 0; attempt < 4 && !settled; ++attempt) {
    Oracle o = options.oracle.with_seed(options.oracle.settings().seed + static_cast<std::uint64_t>(attempt));
    auto points = o.sample_points(flat, count);
    DenseMatrix M(points.size() * E, unknowns.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
      for (std::size_t s = 0; s < in.size(); ++s) in[s] = points[p].at(prog.inputs()[s]);
      if (!prog.run(in, out)) throw Error(Errc::singular_at_sample, "residual singular at a sampled point");
      for (std::size_t e = 0; e < E; ++e) {
        double scale = 0;
        for (std::size_t j = 0; j < unknowns.size(); ++j) scale = std::max(scale, std::abs(out[j * E + e]));
        for (std::size_t j = 0; j < unknowns.size(); ++j) {
          M(p * E + e, j) = scale > 0 ? out[j * E + e] / scale : 0.0;
        }
      }
    }
    sol.sample_points = static_cast<int>(points.size());
    ns = null_space(M, options.rel_threshold);
    // a singular value close to the threshold on either side makes the
    // rank decision fragile; resample
    settled = !(ns.largest_dropped > 1e-11 || (ns.rank > 0 && ns.smallest_kept < 1e-6));
  }
  if (!settled) throw Error(Errc::ill_conditioned, "sample matrix is ill-conditioned near the rank threshold");
  sol.rank = ns.rank;

  const Oracle certifier = options.oracle.with_trials(options.certify_trials);
  for (const auto& v : ns.basis) {
    std::vector<Expr> coeffs;
    bool exact = true;
    for (double c : v) {
      auto r = Rational::approximate(c, options.max_den, options.rational_tol);
      if (!r) {
        exact = false;
        r = Rational::approximate(c, 1000000, 1e-12).value_or(Rational(std::llround(c * 1e9), 1000000000));
      }
      coeffs.emplace_back(*r);
    }
    VectorField f = assemble(unknowns, coeffs, S);
    MuOptions mo;
    mo.oracle = options.oracle;
    sol.certificates.push_back(check_symmetry(eq, prolong(f, twist, N, S, mo), certifier));
    sol.fields.push_back(std::move(f));
    sol.coefficients.push_back(v);
    sol.exact.push_back(exact);
  }
  return sol;
}

}  // namespace jetsym
