#include "jetsym/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "jetsym/dynsys.hpp"
#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/gauge.hpp"
#include "jetsym/invariants.hpp"
#include "jetsym/variational.hpp"

namespace jetsym {

namespace {

// Random polynomials and rational-function expressions for the corpus.
class Corpus {
 public:
  Corpus(std::vector<Expr> leaves, std::uint64_t seed) : leaves_(std::move(leaves)), rng_(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Rational coeff() { return Rational(pick(7) - 3, 1 + pick(2)); }

  Expr polynomial(int degree) {
    std::vector<Expr> terms{Expr(Rational(pick(5) - 2))};
    for (int t = 0; t < 4; ++t) {
      Expr m(coeff());
      const int d = pick(degree + 1);
      for (int k = 0; k < d; ++k) m = m * leaf();
      terms.push_back(m);
    }
    return Expr::sum(std::move(terms));
  }

  Expr leaf() { return leaves_[static_cast<std::size_t>(pick(static_cast<int>(leaves_.size())))]; }

  // Mixed expression with elementary functions, depth-limited.
  Expr expression(int depth) {
    if (depth <= 0 || pick(4) == 0) return pick(3) == 0 ? Expr(coeff()) : leaf();
    switch (pick(6)) {
      case 0: return expression(depth - 1) + expression(depth - 1);
      case 1: return expression(depth - 1) * expression(depth - 1);
      case 2: return expression(depth - 1) / (Expr(2) + pow(leaf(), Rational(2)));
      default: break;
    }
    // no functions of constants: exp(exp(729/4)) overflows everywhere
    Expr a = expression(depth - 1);
    if (a.free_symbols().empty()) return a + leaf();
    switch (pick(3)) {
      case 0: return pow(a, Rational(2 + pick(2)));
      case 1: return sin(a);
      default: return exp(Rational(1, 4) * a);
    }
  }

  VectorField field(const JetSpace& S, int degree) {
    VectorField v = VectorField::zero(S);
    for (auto& e : v.xi) e = polynomial(degree);
    for (auto& e : v.phi) e = polynomial(degree);
    return v;
  }

  VectorField vertical(const JetSpace& S, int degree) {
    VectorField v = VectorField::zero(S);
    for (auto& e : v.phi) e = polynomial(degree);
    return v;
  }

  // Lower triangular with diagonal 1 + l^2 times a unimodular constant.
  ExprMatrix gauge(std::size_t q) {
    ExprMatrix A(q, q);
    for (std::size_t i = 0; i < q; ++i) {
      for (std::size_t j = 0; j < i; ++j) A(i, j) = polynomial(2);
      Expr l = polynomial(1);
      A(i, i) = Expr(1) + l * l;
    }
    ExprMatrix U = ExprMatrix::identity(q);
    for (std::size_t j = 1; j < q; ++j) U(0, j) = Expr(Rational(pick(5) - 2, 2));
    return A * U;
  }

 private:
  std::vector<Expr> leaves_;
  std::mt19937_64 rng_;
};

std::vector<Expr> base_leaves(const JetSpace& S) {
  std::vector<Expr> l;
  for (int i = 0; i < S.n(); ++i) l.push_back(S.x(i));
  for (int a = 0; a < S.m(); ++a) l.push_back(S.u(a));
  return l;
}

// Folds a verdict into the running result.
struct Tally {
  PropertyResult& r;
  std::ostringstream notes;

  void add(const Verdict& v, const std::string& what) {
    r.max_residual = std::max(r.max_residual, v.max_residual);
    if (!v.holds) fail(what);
  }
  void require(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
  void fail(const std::string& what) {
    if (r.pass) notes << "failed: " << what;
    r.pass = false;
  }
  void note(const std::string& s) {
    if (r.pass) notes << s;
  }
  void finish() {
    if (r.detail.empty()) r.detail = notes.str();
  }
};

template <class F>
void tally(PropertyResult& r, F&& body) {
  r.pass = true;
  Tally t{r, {}};
  body(t);
  t.finish();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool throws_code(const std::function<void()>& f, Errc code) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

JetSpace ode11(int k = 6) { return JetSpace({"x"}, {"u"}, k); }
JetSpace ode12(int k = 6) { return JetSpace({"x"}, {"u1", "u2"}, k); }

// Classical fourth-order Runge-Kutta for y^(N) = rhs on a uniform grid.
// Returns the solution and its first N-1 derivatives at every node.
std::vector<std::vector<double>> rk4(const DiffEq& eq, std::vector<double> state, double x0, double h, int steps) {
  const JetSpace& S = eq.space();
  const int N = eq.order();
  const Expr& rhs = eq.solved().front().rhs;
  auto F = [&](double x, const std::vector<double>& y) {
    EvalPoint p;
    p.set(S.independent(0), x);
    for (int j = 0; j < N; ++j) p.set(S.coordinate(0, MultiIndex{j}), y[static_cast<std::size_t>(j)]);
    std::vector<double> d(static_cast<std::size_t>(N));
    for (int j = 0; j + 1 < N; ++j) d[static_cast<std::size_t>(j)] = y[static_cast<std::size_t>(j + 1)];
    d[static_cast<std::size_t>(N - 1)] = evaluate(rhs, p);
    return d;
  };
  auto axpy = [](const std::vector<double>& y, double a, const std::vector<double>& k) {
    std::vector<double> o(y);
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += a * k[i];
    return o;
  };
  std::vector<std::vector<double>> out{state};
  double x = x0;
  for (int s = 0; s < steps; ++s) {
    auto k1 = F(x, state);
    auto k2 = F(x + h / 2, axpy(state, h / 2, k1));
    auto k3 = F(x + h / 2, axpy(state, h / 2, k2));
    auto k4 = F(x + h, axpy(state, h, k3));
    for (std::size_t i = 0; i < state.size(); ++i) state[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    x += h;
    out.push_back(state);
  }
  return out;
}

// ---------------------------------------------------------------------------
// acceptance criteria

void bracket_equivariance(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    auto start = std::chrono::steady_clock::now();
    JetSpace A = ode11(5), B = ode12(5);
    Corpus ca(base_leaves(A), ctx.seed), cb(base_leaves(B), ctx.seed + 1);
    Oracle o = Oracle({ctx.seed, 50, 1e-8});
    for (int pair = 0; pair < 50; ++pair) {
      const JetSpace& S = pair % 2 ? B : A;
      Corpus& c = pair % 2 ? cb : ca;
      auto X = c.field(S, 2), Y = c.field(S, 2);
      auto lhs = commutator(prolong_standard(X, 4, S).as_jet_field(), prolong_standard(Y, 4, S).as_jet_field());
      auto rhs = prolong_standard(commutator(X, Y, S), 4, S).as_jet_field();
      t.add(o.all_equal(coefficient_pairs(lhs, rhs)), "pair " + std::to_string(pair));
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    t.require(r.max_residual < 1e-8, "residual bound");
    t.require(secs < 60, "runtime " + std::to_string(secs) + " s");
    t.note("50 pairs, k = 4, " + sci(secs) + " s");
  });
}

void lambda_defect(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    JetSpace S = ode11(3);
    Oracle o = Oracle({ctx.seed, 50, 1e-10});
    VectorField X = VectorField::vertical({S.x()}, S), Y = VectorField::vertical({S.u()}, S);
    VectorField Z = commutator(X, Y, S);
    const SymbolId ux = S.coordinate(0, MultiIndex{1});
    for (const char* l : {"u_x", "x*u_x", "sin(u)"}) {
      Expr lam = S.parse(l);
      JetField d = commutator(prolong_lambda(X, lam, 1, S).as_jet_field(), prolong_lambda(Y, lam, 1, S).as_jet_field()) -
                   prolong_lambda(Z, lam, 1, S).as_jet_field();
      Expr expect = S.x() * lam + (S.u() - S.x() * S.u_order(0, 1)) * partial(lam, ux);
      t.add(o.equal(d.coefficient(ux), expect), std::string("defect for lambda = ") + l);
      std::vector<Expr> rest;
      for (const auto& [s, e] : d.components()) {
        if (s != ux) rest.push_back(e);
      }
      t.add(o.all_zero(rest), std::string("other coefficients for lambda = ") + l);
    }
    t.require(r.max_residual < 1e-10, "residual bound");
  });
}

void contact_characterization(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace A = ode11(4), B = ode12(4), C({"x", "y"}, {"u"}, 3);
    int std_count = 0;
    for (const JetSpace* S : {&A, &B, &C}) {
      Corpus c(base_leaves(*S), ctx.seed + 7);
      for (int i = 0; i < 4; ++i) {
        t.add(o.all_zero(annihilates_contact(prolong_standard(c.field(*S, 2), 2, *S))), "standard prolongation");
        ++std_count;
      }
    }
    double worst_min = 1e300;
    for (const char* l : {"u_x", "x*u_x", "sin(u)", "1", "x + u"}) {
      for (const char* phi : {"1", "x", "u^2"}) {
        auto v = o.all_zero(annihilates_contact(prolong_lambda(VectorField{{A.parse("x")}, {A.parse(phi)}}, A.parse(l), 2, A)));
        const bool witnessed = !v.holds && v.witness && std::abs(v.witness->lhs - v.witness->rhs) > 0;
        t.require(witnessed, std::string("lambda = ") + l + " passed the contact test");
        if (witnessed) worst_min = std::min(worst_min, std::abs(v.witness->lhs - v.witness->rhs));
      }
    }
    t.note(std::to_string(std_count) + " standard pass; 15 twisted fail, smallest witness |residual| " + sci(worst_min));
  });
}

void mch_flatness(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    JetSpace T({"x", "y"}, {"u1", "u2"}, 3);
    Corpus c(base_leaves(T), ctx.seed + 11);
    Oracle o({ctx.seed, 200, 1e-9});
    for (int i = 0; i < 20; ++i) t.add(mch_verdict(mu_from_gauge(c.gauge(2), T, o), T, o), "gauge " + std::to_string(i));
    t.require(r.max_residual < 1e-9, "residual bound");
    MuTwist bad{{ExprMatrix{{0, 1}, {0, 0}}, ExprMatrix{{0, 0}, {1, 0}}}};
    auto R = check_mch(bad, T);
    bool exact = R.size() == 1 && R[0](0, 0) == Expr(1) && R[0](1, 1) == Expr(-1) && R[0](0, 1).is_zero() &&
                 R[0](1, 0).is_zero();
    t.require(exact, "non-flat pair residual is not diag(1, -1)");
    t.require(!mch_verdict(bad, T, o).holds, "non-flat pair passed");
    t.note("20 gauges flat; non-flat pair residual diag(1, -1)");
  });
}

void gauge_diagrams(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-8});
    JetSpace A = ode11(6), B = ode12(6);
    Corpus ca(base_leaves(A), ctx.seed + 21), cb(base_leaves(B), ctx.seed + 22);
    for (int i = 0; i < 20; ++i) {
      const bool two = i % 2;
      const JetSpace& S = two ? B : A;
      Corpus& c = two ? cb : ca;
      auto X = c.vertical(S, 2);
      t.add(verify_gauge_diagram_mu(X, c.gauge(two ? 2 : 1), 4, S, o).verdict, "mu diagram " + std::to_string(i));
    }
    for (int i = 0; i < 20; ++i) {
      const std::size_t q = 1 + static_cast<std::size_t>(i % 3);
      std::vector<VectorField> Xs;
      for (std::size_t a = 0; a < q; ++a) Xs.push_back(ca.field(A, 2));
      t.add(verify_gauge_diagram_sigma(Xs, ca.gauge(q), 4, A, o).verdict, "sigma diagram " + std::to_string(i));
    }
    t.require(r.max_residual < 1e-8, "residual bound");
    t.require(throws_code([&] { verify_gauge_diagram_mu(VectorField{{Expr(1)}, {Expr(0)}}, ExprMatrix::identity(1), 2, A, o); },
                          Errc::non_vertical_input),
              "non-vertical input accepted");
    t.note("20 mu and 20 sigma instances at k = 4");
  });
}

void ibdp_chains(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-8});
    JetSpace S = ode11(6), T = ode12(6);
    auto du = VectorField::vertical({Expr(1)}, S);
    auto record = [&](const InvariantChain& c, const std::string& what) {
      t.require(c.generated.size() == 3, what + ": chain too short");
      for (const auto& v : c.certificates) t.add(v, what);
    };
    record(generate_invariant_chain({prolong_standard(du, 4, S)}, S.x(), S.parse("u_x"), 4, S, o), "standard");
    record(generate_invariant_chain({prolong_lambda(du, S.parse("u_x"), 4, S)}, S.x(), S.parse("u_x*exp(-u)"), 4, S, o),
           "lambda");
    std::vector<VectorField> Xs{VectorField::vertical({Expr(1), Expr(0)}, T), VectorField::vertical({Expr(0), Expr(1)}, T)};
    ExprMatrix sigma{{0, 0}, {T.parse("u1_x"), 0}};
    auto Ys = prolong_sigma(Xs, sigma, 4, T);
    record(generate_invariant_chain(Ys, T.x(), T.parse("u2_x"), 4, T, o), "sigma");
    record(generate_invariant_chain(Ys, T.x(), T.parse("u1_x*exp(-u2)"), 4, T, o), "sigma, mixed seed");
    t.require(r.max_residual < 1e-8, "residual bound");
    MuTwist mu{{ExprMatrix{{0, 0}, {1, 0}}}};
    auto V = prolong_mu(Xs[0], mu, 3, T);
    t.require(throws_code([&] { generate_invariant_chain({V}, T.parse("u2"), T.parse("u2_x - u1"), 3, T, o); },
                          Errc::ibdp_violation),
              "non-diagonal mu did not raise ibdp-violation");
    t.note("standard, lambda and sigma chains to order 4; mu control raises ibdp-violation");
  });
}

void reduction_round_trip(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode11(5);
    const double h = 1e-3, u0 = 0.3, c0 = 0.3;
    const int steps = 1000;
    std::vector<double> grid;
    for (int i = 0; i <= steps; ++i) grid.push_back(i * h);
    double worst = 0;
    for (int which = 0; which < 2; ++which) {
      DiffEq eq(S, {SolvedEntry{0, MultiIndex{2}, S.parse(which ? "u_x^2 + u_x" : "u_x")}});
      Expr zeta = S.parse(which ? "u_x*exp(-u)" : "u_x");
      auto red = reduce_ode(eq, S.x(), zeta, o);
      const std::string tag = which ? "lambda case" : "standard case";
      t.add(o.equal(red.rhs, red.reduced.u()), tag + ": reduced equation is not w_y = w");
      t.add(red.certificate, tag + ": pullback");
      t.require(red.certificate.max_residual < 1e-9, tag + ": pullback residual bound");
      // reduced solution from H, then quadrature
      const double w0 = evaluate(zeta, {{"x", 0.0}, {"u", u0}, {"u_x", c0}});
      auto wsol = rk4(red.equation, {w0}, 0, h, steps);
      std::vector<double> w;
      for (const auto& s : wsol) w.push_back(s[0]);
      auto v = reconstruct(grid, w, which ? -std::exp(-u0) : u0);
      auto direct = rk4(eq, {u0, c0}, 0, h, steps);
      for (int i = 0; i <= steps; ++i) {
        const double vi = v[static_cast<std::size_t>(i)];
        const double u = which ? -std::log(-vi) : vi;
        worst = std::max(worst, std::abs(u - direct[static_cast<std::size_t>(i)][0]));
      }
    }
    t.require(worst < 1e-6, "reconstruction differs from the direct solve by " + sci(worst));
    t.note("both reduce to w_y = w; reconstruction error " + sci(worst));
  });
}

void characteristic_zero_agreement(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode12(5);
    Corpus c(base_leaves(S), ctx.seed + 31);
    ExprMatrix L{{S.parse("u1_x"), S.parse("x")}, {Expr(2), S.parse("u2*u1")}};
    for (int i = 0; i < 3; ++i) {
      auto X = c.field(S, 2);
      X.xi[0] = X.xi[0] * X.xi[0] + Expr(1);
      auto pts = characteristic_zero_points(X, 3, S, o, 30);
      t.require(pts.size() == 30, "could not place 30 points");
      auto M = prolong_Lambda_ode(X, L, 3, S);
      auto V = prolong_standard(X, 3, S);
      std::vector<ExprPair> pairs;
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j <= 3; ++j) pairs.emplace_back(M.psi(a, j), V.psi(a, j));
      t.add(o.all_equal_at(pairs, pts), "field " + std::to_string(i));
    }
    t.require(r.max_residual < 1e-9, "residual bound");
    t.note("3 fields, 30 points each");
  });
}

void variational_suite(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode11(6);
    Corpus c({S.x(), S.u(), S.u_order(0, 1)}, ctx.seed + 41);
    for (int i = 0; i < 30; ++i) {
      Expr f = c.expression(3);
      t.add(is_total_derivative(total_derivative(f, 0, S), S, o), "total derivative " + std::to_string(i));
    }
    t.require(r.max_residual < 1e-9, "Euler residual bound");
    t.add(verify_flux_identity(VectorField::vertical({Expr(1)}, S), Expr(0), S.parse("u_x^2/2"), S.parse("-u_x"), S, o),
          "flux identity instance");
    JetSpace Q({"x"}, {"q"}, 3);
    for (Rational l : {Rational(0), Rational(1), Rational(-1, 2)}) {
      Expr lam(l);
      auto m = check_mu_conservation(Q.parse("q_x^2/2"), ExprMatrix{{lam}}, VectorField::vertical({exp(-lam * Q.x())}, Q), Q, o);
      t.require(m.hypothesis.holds && m.conservation.holds, "conservation pair for lambda = " + l.str());
    }
    t.note("30 total derivatives; flux identity; conservation for lambda in {0, 1, -1/2}");
  });
}

void sigma_perturbation(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-8});
    auto inst = normal_form_instance({Rational(1), Rational(-1)}, 6, o);
    t.require(inst.invariants.size() == 1, "expected one resonant generator");
    Expr I = inst.invariants.front();
    std::vector<Expr> F{I, I * I};
    PerturbationOptions opt;
    opt.oracle = o;
    for (int k = 1; k <= 3; ++k) {
      auto rep = verify_perturbation_symmetries(inst.ds, inst.alg, F, k, opt);
      t.add(rep.involution, "involution at k = " + std::to_string(k));
      t.add(rep.tangency, "tangency at k = " + std::to_string(k));
      t.require(rep.standard_fails(), "standard prolongations unexpectedly tangent at k = " + std::to_string(k));
    }
    t.require(r.max_residual < 1e-8, "residual bound");
    opt.sigma = sigma_from_perturbation(inst.alg, F, inst.ds.space()).transpose();
    auto neg = verify_perturbation_symmetries(inst.ds, inst.alg, F, 1, opt);
    t.require(!neg.tangency.holds && neg.tangency.witness.has_value(), "transposed sigma passed tangency");
    t.note("diag(1, -1), F = (xy, x^2 y^2), k <= 3; transposed sigma fails tangency");
  });
}

// ---------------------------------------------------------------------------
// module properties

Expr rebuild(const Expr& e) {
  std::vector<Expr> ch;
  for (const auto& c : e.children()) ch.push_back(rebuild(c));
  switch (e.kind()) {
    case NodeKind::constant:
    case NodeKind::symbol: return e;
    case NodeKind::sum: return Expr::sum(ch);
    case NodeKind::product: return Expr::product(ch);
    case NodeKind::power: return Expr::power(ch.front(), e.exponent());
    case NodeKind::apply: return Expr::apply(e.func(), ch.front());
  }
  return e;
}

void expr_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    JetSpace S = ode11(3);
    Corpus c({S.x(), S.u(), S.u_order(0, 1)}, ctx.seed + 51);
    Oracle o({ctx.seed, 50, 1e-9});
    const SymbolId x = S.independent(0);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
      Expr e = c.expression(5), e2 = c.expression(4);
      t.require(rebuild(e) == e, "canonical form is not idempotent");
      Expr a(c.coeff());
      t.add(o.equal(partial(a * e + e2, x), a * partial(e, x) + partial(e2, x)), "linearity of partial");
      t.add(o.equal(S.parse(e.str()), e), "print/parse round trip");
      Expr d = partial(e, x);
      EvalPoint p{{"x", U(rng)}, {"u", U(rng)}, {"u_x", U(rng)}};
      try {
        const double dv = evaluate(d, p), f = evaluate(e, p);
        if (!std::isfinite(dv) || !std::isfinite(f) || std::abs(f) > 1e4 || std::abs(dv) > 1e4) continue;
        const double x0 = p.at(x);
        auto central = [&](double h) {
          p.set(x, x0 + h);
          const double fp = evaluate(e, p);
          p.set(x, x0 - h);
          return (fp - evaluate(e, p)) / (2 * h);
        };
        // Richardson on two steps; skip points where the steps disagree
        const double d1 = central(1e-3), d2 = central(5e-4);
        if (std::abs(d1 - d2) > 1e-3 * (1 + std::abs(dv))) continue;
        const double fd = (4 * d2 - d1) / 3;
        ++compared;
        t.require(std::abs(fd - dv) <= 1e-5 * (1 + std::abs(dv)),
                  "finite difference disagrees for " + e.str() + ": " + sci(fd) + " vs " + sci(dv));
      } catch (const Error&) {
      }
    }
    t.note("100 random expressions; " + std::to_string(compared) + " finite-difference comparisons");
  });
}

void jet_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    JetSpace S({"x", "y"}, {"u"}, 5);
    Corpus c({S.x(0), S.x(1), S.u(), S.parse("u_x"), S.parse("u_y")}, ctx.seed + 61);
    Oracle o({ctx.seed, 50, 1e-9});
    for (int i = 0; i < 10; ++i) {
      Expr e = c.expression(3), f = c.expression(3);
      t.add(o.equal(total_derivative(total_derivative(e, 0, S), 1, S), total_derivative(total_derivative(e, 1, S), 0, S)),
            "total derivatives commute");
      t.add(o.equal(total_derivative(e * f, 0, S), e * total_derivative(f, 0, S) + f * total_derivative(e, 0, S)),
            "Leibniz rule");
    }
    Expr g = S.parse("sin(x)*exp(x/3) + x^3");
    t.add(o.equal(total_derivative(g, 0, S), partial(g, S.independent(0))), "D_x on a function of x");
    JetSpace A = ode11(4), B = ode12(4);
    t.require(!o.all_zero(annihilates_contact(prolong_lambda(VectorField::vertical({Expr(1)}, A), A.parse("u"), 2, A))).holds,
              "lambda twist preserved contact");
    MuTwist mu{{ExprMatrix{{0, 1}, {0, 0}}}};
    t.require(!o.all_zero(annihilates_contact(prolong_mu(VectorField::vertical({B.parse("u1"), B.parse("x")}, B), mu, 2, B))).holds,
              "mu twist preserved contact");
    auto Ys = prolong_sigma({VectorField::vertical({Expr(1)}, A), VectorField::vertical({A.u()}, A)},
                            ExprMatrix{{0, 1}, {1, 0}}, 2, A);
    t.require(!o.all_zero(annihilates_contact(Ys[0])).holds, "sigma twist preserved contact");
  });
}

void prolong_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace T({"x", "y"}, {"u", "v"}, 4);
    ExprMatrix A{{Expr(1), Expr(0)}, {T.parse("x*u + y"), Expr(1)}};
    auto flat = mu_from_gauge(A, T, o);
    auto X = VectorField::vertical({T.parse("x*v"), T.parse("u + y")}, T);
    for (const auto& [p, q] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{
             {{0, 1}, {1, 0}}, {{0, 1, 1}, {1, 1, 0}}, {{0, 0, 1}, {1, 0, 0}}}) {
      auto a = prolong_mu_along_path(X, flat, p, T), b = prolong_mu_along_path(X, flat, q, T);
      t.add(o.all_equal(std::vector<ExprPair>{{a[0], b[0]}, {a[1], b[1]}}), "path independence");
    }
    MuTwist bad{{ExprMatrix{{0, 1}, {0, 0}}, ExprMatrix{{0, 0}, {1, 0}}}};
    auto b1 = prolong_mu_along_path(X, bad, {0, 1}, T), b2 = prolong_mu_along_path(X, bad, {1, 0}, T);
    t.require(!o.all_equal(std::vector<ExprPair>{{b1[0], b2[0]}, {b1[1], b2[1]}}).holds, "non-flat paths agree");
    // truncation, all four engines
    JetSpace S = ode11(5);
    Corpus c(base_leaves(S), ctx.seed + 71);
    Expr lam = S.parse("u_x + x");
    for (int i = 0; i < 3; ++i) {
      auto Y = c.field(S, 2), Z = c.field(S, 2);
      t.add(o.all_equal(coefficient_pairs(prolong_standard(Y, 4, S).truncate(3), prolong_standard(Y, 3, S))), "standard truncation");
      t.add(o.all_equal(coefficient_pairs(prolong_lambda(Y, lam, 4, S).truncate(3), prolong_lambda(Y, lam, 3, S))), "lambda truncation");
      t.add(o.all_equal(coefficient_pairs(prolong_mu(Y, MuTwist{{ExprMatrix{{lam}}}}, 4, S).truncate(2),
                                          prolong_mu(Y, MuTwist{{ExprMatrix{{lam}}}}, 2, S))),
            "mu truncation");
      ExprMatrix sig{{lam, Expr(1)}, {S.u(), Expr(0)}};
      auto hi = prolong_sigma({Y, Z}, sig, 4, S), lo = prolong_sigma({Y, Z}, sig, 3, S);
      t.add(o.all_equal(coefficient_pairs(hi[1].truncate(3), lo[1])), "sigma truncation");
    }
  });
}

void symmetry_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode11(4);
    DiffEq free(S, {SolvedEntry{0, MultiIndex{2}, Expr(0)}});
    AnsatzOptions ao;
    ao.oracle = o;
    auto sol = solve_determining_ansatz(free, AnsatzProblem{monomials({S.x(), S.u()}, 2), {}}, NoTwist{}, ao);
    t.require(sol.fields.size() == 8, "free particle: expected 8 fields, got " + std::to_string(sol.fields.size()));
    Oracle o200 = o.with_trials(200);
    for (const auto& X : sol.fields) t.add(check_symmetry(free, prolong_standard(X, 2, S), o200), "ansatz field");
    // strong implies standard; rescaling keeps the residual zero
    DiffEq eq(S, {SolvedEntry{0, MultiIndex{2}, S.parse("u_x^2 + u_x")}});
    Corpus c({S.x(), S.u(), S.u_order(0, 1), S.u_order(0, 2)}, ctx.seed + 81);
    std::vector<ProlongedField> Vs{prolong_lambda(VectorField::vertical({Expr(1)}, S), S.parse("u_x"), 2, S),
                                   prolong_standard(VectorField{{Expr(1)}, {Expr(0)}}, 2, S),
                                   prolong_standard(VectorField::vertical({S.x()}, S), 2, S)};
    for (const auto& V : Vs) {
      auto strong = o.all_zero(symmetry_residual(eq, V, {.restricted = false, .prolonged = false}));
      auto weak = o.all_zero(symmetry_residual(eq, V));
      if (strong.holds) t.require(weak.holds, "strong symmetry is not a symmetry");
      if (weak.holds) {
        Expr g = Expr(2) + pow(c.polynomial(2), Rational(2));
        t.add(o.zero(restrict_to((g * V.as_jet_field()).apply(eq.residuals()[0]), eq)), "rescaled residual");
      }
    }
    // sigma-prolonged fields of a perturbed normal form close with the declared constants
    auto inst = normal_form_instance({Rational(1), Rational(-1)}, 4, o);
    Expr I = inst.invariants.front();
    std::vector<Expr> F{I, Expr(3) * I};
    auto Ys = prolong_sigma(inst.alg.fields, sigma_from_perturbation(inst.alg, F, inst.ds.space()), 2, inst.ds.space());
    std::vector<JetField> js;
    for (const auto& Y : Ys) js.push_back(Y.as_jet_field());
    InvolutionOptions io;
    io.oracle = o;
    auto res = check_involution(js, io);
    t.require(std::holds_alternative<InvolutiveSystem>(res), "sigma-prolonged fields are not in involution");
    if (auto* sys = std::get_if<InvolutiveSystem>(&res)) {
      for (std::size_t a = 0; a < Ys.size(); ++a)
        for (std::size_t b = 0; b < Ys.size(); ++b)
          for (std::size_t g = 0; g < Ys.size(); ++g)
            if (a != b) t.add(o.equal(sys->structure[a][b][g], Expr(inst.alg.structure[a][b][g])), "structure function");
    }
  });
}

void invariants_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-8});
    JetSpace S = ode11(6);
    auto c = generate_invariant_chain({prolong_lambda(VectorField::vertical({Expr(1)}, S), S.parse("u_x"), 4, S)}, S.x(),
                                      S.parse("u_x*exp(-u)"), 4, S, o);
    std::vector<Expr> chain{S.parse("u_x*exp(-u)")};
    chain.insert(chain.end(), c.generated.begin(), c.generated.end());
    for (const auto& v : c.certificates) t.add(v, "chain element");
    // Jacobian of (zeta_1..zeta_4) in (u_1..u_4) has full rank at 10 points
    auto pts = o.sample_points(chain, 10);
    for (const auto& p : pts) {
      DenseMatrix J(4, 4);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
          J(i, j) = evaluate(partial(chain[i], S.coordinate(0, MultiIndex{static_cast<int>(j) + 1})), p);
      t.require(null_space(J).rank == 4, "chain elements are dependent at a sample point");
    }
    DiffEq eq(S, {SolvedEntry{0, MultiIndex{3}, S.parse("u_xx*u_x + u_x")}});
    auto red = reduce_ode(eq, S.x(), S.parse("u_x"), o);
    t.add(red.certificate, "third-order round trip");
  });
}

void gauge_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode11(4);
    // no standard symmetry in the quadratic ansatz, but d_u with the twist
    // from the gauge e^u
    DiffEq eq(S, {SolvedEntry{0, MultiIndex{2}, S.parse("u_x^2 + x*exp(u) + x*u_x^2*exp(-u)")}});
    AnsatzOptions ao;
    ao.oracle = o;
    auto std_sol = solve_determining_ansatz(eq, AnsatzProblem{monomials({S.x(), S.u()}, 2), {}}, NoTwist{}, ao);
    t.require(std_sol.fields.empty(), "found a standard symmetry in the quadratic ansatz");
    auto mu = mu_from_gauge(ExprMatrix{{exp(S.u())}}, S, o);
    t.add(o.equal(mu.Lambda[0](0, 0), S.parse("u_x")), "gauge twist is u_x");
    t.add(check_symmetry(eq, prolong_mu(VectorField::vertical({Expr(1)}, S), mu, 2, S), o), "twisted symmetry");
    JetSpace B = ode12(5);
    Corpus c(base_leaves(B), ctx.seed + 91);
    for (int i = 0; i < 3; ++i)
      t.add(verify_gauge_diagram_mu(c.vertical(B, 2), c.gauge(2), 3, B, o).verdict, "mu diagram");
  });
}

void variational_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-9});
    JetSpace S = ode11(6);
    Corpus c({S.x(), S.u(), S.u_order(0, 1)}, ctx.seed + 101);
    // Noether consistency for vertical variational symmetries
    Expr L = S.parse("u_x^2/2");
    for (const auto& [phi, F] : std::vector<std::pair<const char*, const char*>>{{"1", "0"}, {"x", "u"}, {"3 + 2*x", "2*u"}}) {
      VectorField X = VectorField::vertical({S.parse(phi)}, S);
      t.add(check_variational_symmetry(X, L, S.parse(F), S, o), std::string("variational symmetry ") + phi);
      Expr Fn = noether_flux(X, Expr(0), L, S);
      t.add(o.zero(noether_identity_residual(X, Expr(0), L, Fn, S)), "Noether identity");
      t.add(verify_flux_identity(X, Expr(0), L, S.parse(F) - Fn, S, o), "conserved flux");
    }
    // lambda = 0 agrees with the standard operations
    for (int i = 0; i < 5; ++i) {
      VectorField X = c.field(S, 2);
      Expr Lr = c.polynomial(3), F = c.polynomial(2);
      t.add(o.equal(variational_lambda_residual(X, Expr(0), Lr, F, S), variational_residual(X, Lr, F, S)), "lambda = 0");
      t.add(o.all_equal(coefficient_pairs(prolong_lambda(X, Expr(0), 3, S), prolong_standard(X, 3, S))), "lambda = 0 table");
    }
    // conservation whenever the hypothesis holds
    JetSpace Q({"x"}, {"q1", "q2"}, 3);
    Expr LQ = Q.parse("(q1_x^2 + q2_x^2)/2");
    struct Case {
      ExprMatrix Lambda;
      std::vector<const char*> phi;
    };
    std::vector<Case> cases{{ExprMatrix{{0, 1}, {0, 0}}, {"-x", "1"}},
                            {ExprMatrix{{1, 0}, {0, 2}}, {"exp(-x)", "exp(-2*x)"}},
                            {ExprMatrix{{0, 0}, {0, 0}}, {"1", "3"}},
                            {ExprMatrix{{1, 0}, {0, 1}}, {"x", "1"}}};
    int hyp = 0;
    for (const auto& cs : cases) {
      auto m = check_mu_conservation(LQ, cs.Lambda, VectorField::vertical({Q.parse(cs.phi[0]), Q.parse(cs.phi[1])}, Q), Q, o);
      if (m.hypothesis.holds) {
        ++hyp;
        t.add(m.conservation, "conservation");
      }
    }
    t.require(hyp == 3, "unexpected hypothesis verdicts");
  });
}

void dynsys_properties(const SelftestContext& ctx, PropertyResult& r) {
  tally(r, [&](Tally& t) {
    Oracle o({ctx.seed, 50, 1e-8});
    Corpus pick({Expr(1)}, ctx.seed + 111);
    PerturbationOptions opt;
    opt.oracle = o;
    for (const auto& ev : std::vector<std::vector<Rational>>{{Rational(1), Rational(-1)},
                                                             {Rational(2), Rational(-1)},
                                                             {Rational(1), Rational(-1), Rational(2)}}) {
      auto inst = normal_form_instance(ev, 6, o);
      auto cert = certify_algebra(inst.alg, inst.ds.space(), o);
      t.require(cert.antisymmetric && cert.jacobi, "structure constants");
      t.add(cert.brackets, "brackets");
      std::vector<Expr> F;
      for (std::size_t a = 0; a < inst.alg.fields.size(); ++a) {
        std::vector<Expr> terms;
        for (const auto& I : inst.invariants) terms.push_back(Expr(pick.coeff()) * I + Expr(pick.coeff()) * I * I);
        F.push_back(Expr::sum(std::move(terms)));
      }
      for (int k = 1; k <= 3; ++k) {
        auto rep = verify_perturbation_symmetries(inst.ds, inst.alg, F, k, opt);
        t.add(rep.involution, "involution");
        t.add(rep.tangency, "tangency");
      }
    }
    // perturbed system with no standard symmetry in a quadratic ansatz
    JetSpace D({"t"}, {"x", "y"}, 3);
    DynamicalSystem ds(D, {D.parse("x"), D.parse("-y")});
    SymmetryAlgebra alg;
    alg.fields = {VectorField::vertical({D.parse("x"), Expr(0)}, D), VectorField::vertical({Expr(0), D.parse("y")}, D)};
    alg.structure = structure_constants(alg.fields, D, o);
    std::vector<Expr> F{D.parse("y^2"), D.parse("x^2")};
    auto rep = verify_perturbation_symmetries(ds, alg, F, 1, opt);
    t.require(rep.passed(), "perturbation symmetries");
    auto basis = monomials({D.x(), D.u(0), D.u(1)}, 2);
    AnsatzOptions ao;
    ao.oracle = o;
    auto sol = solve_determining_ansatz(perturbed_system(ds, alg, F).as_diffeq(), AnsatzProblem{{}, {{}, basis, basis}}, NoTwist{}, ao);
    t.require(sol.fields.empty(), "standard search found a symmetry of the perturbed system");
  });
}

}  // namespace

const std::vector<Property>& acceptance_criteria() {
  static const std::vector<Property> list{
      {"bracket-equivariance", "acceptance", "prolongation of a commutator equals the commutator of prolongations",
       bracket_equivariance},
      {"lambda-commutator-defect", "acceptance", "lambda-prolongation commutator defect has the closed form",
       lambda_defect},
      {"contact-characterization", "acceptance", "standard prolongations preserve contact, lambda-twisted ones do not",
       contact_characterization},
      {"mch-flatness", "acceptance", "pure-gauge twists are flat, the constant pair is not", mch_flatness},
      {"gauge-diagrams", "acceptance", "mu and sigma gauge diagrams commute", gauge_diagrams},
      {"invariants-by-differentiation", "acceptance", "generated invariant chains are annihilated", ibdp_chains},
      {"reduction-round-trip", "acceptance", "reduction, pullback and reconstruction", reduction_round_trip},
      {"characteristic-zero-agreement", "acceptance", "mu and standard tables agree where D_J Q = 0",
       characteristic_zero_agreement},
      {"variational-suite", "acceptance", "Euler operator, flux identity and mu-conservation", variational_suite},
      {"sigma-perturbation-end-to-end", "acceptance", "normal-form perturbation admits sigma-symmetries",
       sigma_perturbation},
  };
  return list;
}

const std::vector<Property>& module_properties() {
  static const std::vector<Property> list{
      {"expr-kernel", "expr_core", "idempotence, linearity, finite differences, round trip", expr_properties},
      {"total-derivatives", "jet_space", "commutation, Leibniz, twisted contact residuals", jet_properties},
      {"path-independence-and-truncation", "prolong", "mu paths and truncation of all engines", prolong_properties},
      {"determining-equations", "symmetry", "ansatz certificates, strong symmetries, rescaling, involution",
       symmetry_properties},
      {"chains-and-reduction", "invariants", "chain independence and third-order round trip", invariants_properties},
      {"twist-from-gauge", "gauge", "twisted symmetry without standard ones; mu diagrams", gauge_properties},
      {"noether-and-conservation", "variational", "Noether consistency, zero twist, conservation", variational_properties},
      {"normal-forms", "dynsys", "normal-form instances and the symmetry-free perturbation", dynsys_properties},
  };
  return list;
}

PropertyResult run_property(const Property& p, const SelftestContext& ctx) {
  PropertyResult r;
  auto start = std::chrono::steady_clock::now();
  try {
    p.run(ctx, r);
  } catch (const Error& e) {
    r.pass = false;
    r.detail = std::string("error (") + std::string(to_string(e.code())) + "): " + e.what();
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.name = p.name;
  r.group = p.group;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<PropertyResult> run_properties(const std::vector<Property>& ps, const SelftestContext& ctx) {
  std::vector<PropertyResult> out;
  for (const auto& p : ps) out.push_back(run_property(p, ctx));
  return out;
}

}  // namespace jetsym
