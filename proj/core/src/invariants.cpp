#include "jetsym/invariants.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "jetsym/error.hpp"

namespace jetsym {

Verdict invariance(const std::vector<ProlongedField>& Vs, const Expr& zeta, const Oracle& oracle) {
  std::vector<Expr> r;
  for (const auto& V : Vs) {
    if (V.space().order_of(zeta) > V.order())
      throw Error(Errc::invalid_argument, "invariant candidate exceeds the prolongation order");
    r.push_back(V.apply(zeta));
  }
  return oracle.all_zero(r);
}

bool is_invariant(const std::vector<ProlongedField>& Vs, const Expr& zeta, const Oracle& oracle) {
  return invariance(Vs, zeta, oracle).holds;
}

Expr ibdp_step(const Expr& eta, const Expr& zeta, const JetSpace& S, const Oracle& oracle) {
  if (S.n() != 1) throw Error(Errc::invalid_argument, "ibdp_step needs one independent variable");
  Expr deta = total_derivative(eta, 0, S);
  if (deta.is_zero() || oracle.zero(deta).holds) throw Error(Errc::degenerate_base, "D_x of the base invariant vanishes");
  return total_derivative(zeta, 0, S) / deta;
}

InvariantChain generate_invariant_chain(const std::vector<ProlongedField>& Vs, const Expr& eta, const Expr& zeta,
                                        int target, const JetSpace& S, const Oracle& oracle) {
  if (Vs.empty()) throw Error(Errc::invalid_argument, "no fields");
  for (const auto& V : Vs) {
    if (V.order() < target) throw Error(Errc::invalid_argument, "fields are prolonged below the target order");
  }
  if (!invariance(Vs, eta, oracle).holds) throw Error(Errc::precondition_failure, "base invariant is not invariant");
  if (!invariance(Vs, zeta, oracle).holds) throw Error(Errc::precondition_failure, "seed invariant is not invariant");
  bool sigma = false;
  for (const auto& V : Vs) sigma = sigma || V.twist() == TwistKind::sigma;
  if (sigma && Vs.size() > 1) {
    std::vector<JetField> fs;
    for (const auto& V : Vs) fs.push_back(V.as_jet_field());
    try {
      InvolutionOptions io;
      io.oracle = oracle;
      auto r = check_involution(fs, io);
      if (std::holds_alternative<InvolutionFailure>(r))
        throw Error(Errc::precondition_failure, "sigma-prolonged fields are not in involution");
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_distribution) throw;
      throw Error(Errc::precondition_failure, "sigma-prolonged fields are linearly dependent");
    }
  }
  InvariantChain out{eta, zeta, {}, {}};
  Expr prev = zeta;
  for (int k = std::max(S.order_of(zeta), 0) + 1; k <= target; ++k) {
    Expr next = ibdp_step(eta, prev, S, oracle);
    Verdict v = invariance(Vs, next, oracle);
    if (!v.holds) {
      std::ostringstream msg;
      msg << "generated invariant of order " << k << " is not annihilated (residual " << v.max_residual << ")";
      throw Error(Errc::ibdp_violation, msg.str());
    }
    out.generated.push_back(next);
    out.certificates.push_back(v);
    prev = next;
  }
  return out;
}

namespace {

// e = a s + b with a free of s and not zero.
struct Affine {
  Expr slope, intercept;
};

std::optional<Affine> affine_in(const Expr& e, SymbolId s, const Oracle& oracle) {
  Expr a = partial(e, s);
  if (a.is_zero() || oracle.zero(a).holds) return std::nullopt;
  if (!oracle.zero(partial(a, s)).holds) return std::nullopt;
  return Affine{a, substitute(e, {{s, Expr(0)}})};
}

}  // namespace

ReductionResult reduce_ode(const DiffEq& eq, const Expr& eta, const Expr& zeta, const Oracle& oracle) {
  const JetSpace& S = eq.space();
  if (S.n() != 1 || S.m() != 1 || eq.solved().size() != 1)
    throw Error(Errc::invalid_argument, "reduction needs a scalar ODE");
  const int N = eq.order();
  if (N < 2) throw Error(Errc::invalid_argument, "reduction needs order >= 2");
  if (S.order_of(eta) > 0) throw Error(Errc::invalid_argument, "base invariant must be of order 0");
  if (S.order_of(zeta) != 1) throw Error(Errc::invalid_argument, "seed invariant must be of order 1");
  auto clash = [](const std::string& s) { return s == "y" || s == "w" || s.rfind("w_", 0) == 0; };
  for (const auto* names : {&S.independent_names(), &S.dependent_names(), &S.parameter_names()}) {
    for (const auto& s : *names) {
      if (clash(s)) throw Error(Errc::invalid_argument, "name '" + s + "' clashes with the reduced coordinates");
    }
  }
  const JetSpace& T = eq.closure();
  std::vector<Expr> chain{zeta};
  for (int j = 1; j < N; ++j) chain.push_back(ibdp_step(eta, chain.back(), T, oracle));

  JetSpace R({"y"}, {"w"}, N, S.parameter_names());
  const Expr y = R.x();
  auto w = [&](int j) { return R.u_order(0, j); };

  // eta = y solved for x (freezing u) or for u (freezing x)
  const SymbolId sx = S.independent(0), su = S.coordinate(0, MultiIndex{0});
  Bindings sub;
  SymbolId frozen;
  if (auto a = affine_in(eta, sx, oracle)) {
    sub[sx] = (y - a->intercept) / a->slope;
    frozen = su;
  } else if (auto b = affine_in(eta, su, oracle)) {
    sub[su] = (y - b->intercept) / b->slope;
    frozen = sx;
  } else {
    throw Error(Errc::not_expressible, "base invariant cannot be solved for x or u");
  }
  for (int j = 1; j < N; ++j) {
    const SymbolId uj = S.coordinate(0, MultiIndex{j});
    auto aff = affine_in(chain[static_cast<std::size_t>(j - 1)], uj, oracle);
    if (!aff) {
      throw Error(Errc::non_generic_chain, "invariant of order " + std::to_string(j) + " is not affine with nonzero slope in " +
                                               S.coordinate_name(0, MultiIndex{j}));
    }
    sub[uj] = substitute((w(j - 1) - aff->intercept) / aff->slope, sub);
  }
  Expr H = substitute(restrict_to(chain.back(), eq), sub);
  Verdict indep = oracle.zero(partial(H, frozen));
  if (!indep.holds) {
    std::ostringstream msg;
    msg << "reduced equation depends on a non-invariant coordinate";
    if (indep.witness) {
      msg << " at";
      for (const auto& [k, v] : indep.witness->point) msg << ' ' << k << '=' << v;
    }
    throw Error(Errc::not_expressible, msg.str());
  }
  Expr rhs;
  bool found = false;
  for (Rational v : {Rational(1), Rational(0), Rational(2), Rational(-1), Rational(1, 2), Rational(3)}) {
    Expr cand = substitute(H, {{frozen, Expr(v)}});
    try {
      std::vector<Expr> probe{cand};
      oracle.sample_points(probe, 5);
    } catch (const Error&) {
      continue;
    }
    rhs = cand;
    found = true;
    break;
  }
  if (!found) throw Error(Errc::not_expressible, "reduced equation is singular for every frozen value tried");
  for (SymbolId s : rhs.free_symbols()) {
    if (!R.jet(s) && !R.independent_index(s) && !R.is_parameter(s))
      throw Error(Errc::not_expressible, "reduced equation still involves " + symbol_name(s));
  }

  Bindings pull{{R.independent(0), eta}};
  std::vector<Expr> substitution;
  for (int j = 0; j < N - 1; ++j) {
    pull[R.coordinate(0, MultiIndex{j})] = chain[static_cast<std::size_t>(j)];
    substitution.push_back(chain[static_cast<std::size_t>(j)]);
  }
  Expr residual = restrict_to(chain.back() - substitute(rhs, pull), eq);
  Verdict cert = oracle.with_trials(100).zero(residual);
  if (!cert.holds) throw Error(Errc::not_expressible, "pullback of the reduced equation does not vanish on solutions");
  DiffEq red(R, {SolvedEntry{0, MultiIndex{N - 1}, rhs}});
  return ReductionResult{eta, zeta, R, chain, substitution, rhs, red, cert};
}

std::vector<double> reconstruct(const std::vector<double>& y, const std::vector<double>& w, double v0) {
  const std::size_t n = y.size();
  if (w.size() != n) throw Error(Errc::size_mismatch, "grid and samples differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(w[i])) throw Error(Errc::invalid_argument, "non-finite sample");
  }
  std::vector<double> v(n, v0);
  if (n < 2) return v;
  const double h = (y[n - 1] - y[0]) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(y[i] - y[i - 1] - h) > 1e-9 * (1 + std::abs(h)) + 1e-6 * std::abs(h))
      throw Error(Errc::invalid_argument, "grid is not uniform");
  }
  if (n == 2) {
    v[1] = v0 + h / 2 * (w[0] + w[1]);
    return v;
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (i % 2 == 0) {
      v[i] = v[i - 2] + h / 3 * (w[i - 2] + 4 * w[i - 1] + w[i]);
    } else if (i + 1 < n) {
      // quadratic through i-1, i, i+1 integrated over the first half
      v[i] = v[i - 1] + h / 12 * (5 * w[i - 1] + 8 * w[i] - w[i + 1]);
    } else {
      v[i] = v[i - 1] + h / 12 * (-w[i - 2] + 8 * w[i - 1] + 5 * w[i]);
    }
  }
  return v;
}

SampledFunction read_csv(std::istream& in, const std::string& first, const std::string& second) {
  std::string line;
  auto trim = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  if (!std::getline(in, line) || trim(line) != first + "," + second)
    throw Error(Errc::syntax, "CSV header must be '" + first + "," + second + "'");
  SampledFunction f;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(Errc::syntax, "CSV line " + std::to_string(lineno) + ": expected two columns");
    try {
      std::size_t p1 = 0, p2 = 0;
      std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      double va = std::stod(a, &p1), vb = std::stod(b, &p2);
      if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("trailing");
      f.y.push_back(va);
      f.values.push_back(vb);
    } catch (const std::exception&) {
      throw Error(Errc::syntax, "CSV line " + std::to_string(lineno) + ": not a number");
    }
  }
  return f;
}

void write_csv(std::ostream& out, const SampledFunction& f, const std::string& first, const std::string& second) {
  out << first << ',' << second << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < f.y.size(); ++i) out << f.y[i] << ',' << f.values[i] << '\n';
  out.precision(old);
}

}  // namespace jetsym
