#include <cmath>
#include <functional>

#include "doctest.h"
#include "jetsym/error.hpp"
#include "jetsym/prolong.hpp"
#include "support.hpp"

using namespace jetsym;
using testing_support::ExprGen;

namespace {

// Flow oracle for n = m = 1. Integrates the flow of X with RK4, pushes the
// section u = f(x) through it, and differentiates the image numerically.
struct FlowOracle {
  Expr xi, phi;

  std::pair<double, double> flow(double x, double u, double eps) const {
    auto F = [&](double a, double b) {
      EvalPoint p{{"x", a}, {"u", b}};
      return std::pair<double, double>{evaluate(xi, p), evaluate(phi, p)};
    };
    const int steps = 16;
    double h = eps / steps;
    for (int s = 0; s < steps; ++s) {
      auto [k1x, k1u] = F(x, u);
      auto [k2x, k2u] = F(x + h / 2 * k1x, u + h / 2 * k1u);
      auto [k3x, k3u] = F(x + h / 2 * k2x, u + h / 2 * k2u);
      auto [k4x, k4u] = F(x + h * k3x, u + h * k3u);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    }
    return {x, u};
  }

  // (u~', u~'') of the transformed section at the image of (s0, f(s0)).
  std::pair<double, double> image_jet(const std::function<double(double)>& f, double s0, double eps) const {
    const double h = 1e-2;
    double X[5], U[5];
    for (int t = -2; t <= 2; ++t) {
      auto [a, b] = flow(s0 + t * h, f(s0 + t * h), eps);
      X[t + 2] = a;
      U[t + 2] = b;
    }
    auto d1 = [&](const double* g) { return (-g[4] + 8 * g[3] - 8 * g[1] + g[0]) / (12 * h); };
    auto d2 = [&](const double* g) { return (-g[4] + 16 * g[3] - 30 * g[2] + 16 * g[1] - g[0]) / (12 * h * h); };
    double Xs = d1(X), Us = d1(U), Xss = d2(X), Uss = d2(U);
    return {Us / Xs, (Uss * Xs - Us * Xss) / (Xs * Xs * Xs)};
  }

  // d/d eps at 0 of the image jet coordinates.
  std::pair<double, double> psi(const std::function<double(double)>& f, double s0) const {
    const double e = 1e-3;
    auto jm2 = image_jet(f, s0, -2 * e), jm1 = image_jet(f, s0, -e);
    auto jp1 = image_jet(f, s0, e), jp2 = image_jet(f, s0, 2 * e);
    auto d = [&](double a2, double a1, double b1, double b2) { return (-b2 + 8 * b1 - 8 * a1 + a2) / (12 * e); };
    return {d(jm2.first, jm1.first, jp1.first, jp2.first), d(jm2.second, jm1.second, jp1.second, jp2.second)};
  }
};

void check_against_flow(const VectorField& X, const JetSpace& S) {
  auto V = prolong_standard(X, 2, S);
  FlowOracle fo{X.xi[0], X.phi[0]};
  auto f = [](double x) { return 0.5 * std::sin(x) + x * x / 3; };
  auto f1 = [](double x) { return 0.5 * std::cos(x) + 2 * x / 3; };
  auto f2 = [](double x) { return -0.5 * std::sin(x) + 2.0 / 3; };
  for (double s0 : {-0.7, 0.2, 0.9}) {
    auto [p1, p2] = fo.psi(f, s0);
    EvalPoint pt{{"x", s0}, {"u", f(s0)}, {"u_x", f1(s0)}, {"u_xx", f2(s0)}};
    CHECK(std::abs(evaluate(V.psi(0, 1), pt) - p1) < 1e-6);
    CHECK(std::abs(evaluate(V.psi(0, 2), pt) - p2) < 1e-5);
  }
}

const JetSpace& S1() {
  static const JetSpace S({"x"}, {"u"}, 5);
  return S;
}

const JetSpace& S2() {
  static const JetSpace S({"x"}, {"u1", "u2"}, 5);
  return S;
}

Expr P(const char* s) { return S1().parse(s); }

VectorField field(const JetSpace& S, std::vector<const char*> xi, std::vector<const char*> phi) {
  VectorField v;
  for (auto s : xi) v.xi.push_back(S.parse(s));
  for (auto s : phi) v.phi.push_back(S.parse(s));
  return v;
}

VectorField random_field(const JetSpace& S, ExprGen& g, int degree) {
  VectorField v = VectorField::zero(S);
  for (auto& e : v.xi) e = g.polynomial(degree);
  for (auto& e : v.phi) e = g.polynomial(degree);
  return v;
}

std::vector<Expr> base_leaves(const JetSpace& S) {
  std::vector<Expr> l;
  for (int i = 0; i < S.n(); ++i) l.push_back(S.x(i));
  for (int a = 0; a < S.m(); ++a) l.push_back(S.u(a));
  return l;
}

bool same_tables(const ProlongedField& a, const ProlongedField& b, const Oracle& o = {}) {
  auto pairs = coefficient_pairs(a, b);
  return o.all_equal(pairs).holds;
}

}  // namespace

TEST_CASE("standard prolongation examples") {
  const auto& S = S1();
  auto V = prolong_standard(field(S, {"0"}, {"1"}), 4, S);
  for (int j = 1; j <= 4; ++j) CHECK(V.psi(0, j).is_zero());

  auto W = prolong_standard(field(S, {"0"}, {"x"}), 2, S);
  CHECK(W.psi(0, 1) == Expr(1));
  CHECK(W.psi(0, 2).is_zero());
  check_against_flow(field(S, {"0"}, {"x"}), S);

  auto R = prolong_standard(field(S, {"-u"}, {"x"}), 2, S);
  Oracle o;
  CHECK(o.equal(R.psi(0, 1), P("1 + u_x^2")).holds);
  CHECK(o.equal(R.psi(0, 2), P("3*u_x*u_xx")).holds);
  check_against_flow(field(S, {"-u"}, {"x"}), S);
  check_against_flow(field(S, {"x*u"}, {"u^2 + x"}), S);
}

TEST_CASE("standard prolongation errors") {
  const auto& S = S1();
  CHECK_THROWS_AS(prolong_standard(field(S, {"0"}, {"1"}), 6, S), Error);
  CHECK_THROWS_AS(prolong_standard(field(S, {"0", "0"}, {"1"}), 1, S), Error);
  // a jet-dependent coefficient needs one more order than the table
  CHECK_THROWS_AS(prolong_standard(field(S, {"0"}, {"u_x"}), 5, S), Error);
}

TEST_CASE("lambda prolongation examples") {
  const auto& S = S1();
  Oracle o;
  ExprGen g(base_leaves(S), 31);
  for (int t = 0; t < 5; ++t) {
    auto X = random_field(S, g, 2);
    CHECK(same_tables(prolong_lambda(X, Expr(), 3, S), prolong_standard(X, 3, S)));
  }
  for (const char* lam : {"u_x", "x*u", "sin(u)*u_x"}) {
    auto V = prolong_lambda(field(S, {"0"}, {"u"}), P(lam), 1, S);
    CHECK(o.equal(V.psi(0, 1), P("u_x") + P(lam) * P("u")).holds);
  }
  auto V = prolong_lambda(field(S, {"0"}, {"1"}), P("u_x"), 2, S);
  CHECK(o.equal(V.psi(0, 1), P("u_x")).holds);
  CHECK(o.equal(V.psi(0, 2), P("u_xx + u_x^2")).holds);
  CHECK(V.twist() == TwistKind::lambda);
  try {
    prolong_lambda(field(S, {"0"}, {"1"}), P("u_xx"), 2, S);
    FAIL("expected invalid twist");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_twist);
  }
}

TEST_CASE("lambda prolongation with nonzero xi, one step by hand") {
  // psi_1 = D_x phi + lam phi - u_x (D_x xi + lam xi)
  const auto& S = S1();
  auto X = field(S, {"x*u"}, {"u^2"});
  Expr lam = P("x + u_x");
  auto V = prolong_lambda(X, lam, 1, S);
  Expr expect = P("2*u*u_x") + lam * P("u^2") - P("u_x") * (P("u + x*u_x") + lam * P("x*u"));
  CHECK(Oracle().equal(V.psi(0, 1), expect).holds);
}

TEST_CASE("MCH residuals") {
  JetSpace S({"x"}, {"u"}, 2);
  CHECK(check_mch(MuTwist{{ExprMatrix{{S.parse("u_x")}}}}, S).empty());

  JetSpace T({"x", "y"}, {"u", "v"}, 2);
  MuTwist bad{{ExprMatrix{{0, 1}, {0, 0}}, ExprMatrix{{0, 0}, {1, 0}}}};
  auto R = check_mch(bad, T);
  REQUIRE(R.size() == 1);
  CHECK(R[0](0, 0) == Expr(1));
  CHECK(R[0](1, 1) == Expr(-1));
  CHECK(R[0](0, 1).is_zero());
  CHECK(R[0](1, 0).is_zero());
  CHECK_FALSE(mch_verdict(bad, T).holds);
  try {
    prolong_mu(field(T, {"0", "0"}, {"u", "v"}), bad, 1, T);
    FAIL("expected mch violation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::mch_violation);
  }
  MuOptions unchecked;
  unchecked.unchecked = true;
  CHECK_NOTHROW(prolong_mu(field(T, {"0", "0"}, {"u", "v"}), bad, 1, T, unchecked));
  // commuting constants are flat
  MuTwist flat{{ExprMatrix{{1, 2}, {0, 1}}, ExprMatrix{{3, 5}, {0, 3}}}};
  CHECK(mch_verdict(flat, T).holds);
}

TEST_CASE("mu prolongation special cases") {
  const auto& S = S2();
  ExprGen g(base_leaves(S), 41);
  Oracle o;
  for (int t = 0; t < 4; ++t) {
    auto X = random_field(S, g, 2);
    CHECK(same_tables(prolong_mu(X, MuTwist{{ExprMatrix(2, 2)}}, 3, S), prolong_standard(X, 3, S)));
    // diagonal Lambda decouples into lambda-prolongations per component
    Expr l1 = S.parse("u1_x"), l2 = S.parse("x*u2");
    auto M = prolong_mu(X, MuTwist{{ExprMatrix::diagonal({l1, l2})}}, 3, S);
    auto A = prolong_lambda(X, l1, 3, S);
    auto B = prolong_lambda(X, l2, 3, S);
    for (int j = 1; j <= 3; ++j) {
      CHECK(o.equal(M.psi(0, j), A.psi(0, j)).holds);
      CHECK(o.equal(M.psi(1, j), B.psi(1, j)).holds);
    }
    // Lambda = lambda I is the componentwise lambda-prolongation
    auto I = prolong_Lambda_ode(X, ExprMatrix::diagonal({l1, l1}), 3, S);
    CHECK(same_tables(I, A));
  }
}

TEST_CASE("Lambda prolongation one step") {
  const auto& S = S2();
  ExprGen g(base_leaves(S), 43);
  Oracle o;
  ExprMatrix L{{Rational(1, 2), 3}, {-2, Rational(-1, 3)}};
  for (int t = 0; t < 4; ++t) {
    auto X = random_field(S, g, 2);
    auto V = prolong_Lambda_ode(X, L, 1, S);
    Expr Dxi = total_derivative(X.xi[0], 0, S);
    for (int a = 0; a < 2; ++a) {
      Expr expect = total_derivative(X.phi[a], 0, S) - S.u_order(a, 1) * Dxi;
      for (int b = 0; b < 2; ++b) expect += L(a, b) * (X.phi[b] - S.u_order(b, 1) * X.xi[0]);
      CHECK(o.equal(V.psi(a, 1), expect).holds);
    }
  }
}

TEST_CASE("mu prolongation against a gauge-transformed standard prolongation") {
  // Lambda = [[0,1],[0,0]] is A^{-1} D_x A for A = [[1,x],[0,1]]; for a
  // vertical field, A psi_mu must equal the standard prolongation of A phi.
  const auto& S = S2();
  auto X = field(S, {"0"}, {"u1", "u2"});
  ExprMatrix L{{0, 1}, {0, 0}};
  ExprMatrix A{{1, S.x()}, {0, 1}};
  auto V = prolong_Lambda_ode(X, L, 3, S);
  auto W = prolong_standard(VectorField::vertical(A * X.phi, S), 3, S);
  Oracle o;
  for (int j = 0; j <= 3; ++j) {
    std::vector<Expr> psi{V.psi(0, j), V.psi(1, j)};
    auto Apsi = A * psi;
    CHECK(o.equal(Apsi[0], W.psi(0, j)).holds);
    CHECK(o.equal(Apsi[1], W.psi(1, j)).holds);
  }
  // closed form of the first step: psi^1_1 = u1_x + u2, psi^2_1 = u2_x
  CHECK(o.equal(V.psi(0, 1), S.parse("u1_x + u2")).holds);
  CHECK(o.equal(V.psi(1, 1), S.parse("u2_x")).holds);
}

TEST_CASE("sigma prolongation special cases") {
  const auto& S = S1();
  ExprGen g(base_leaves(S), 47);
  Expr lam = P("u_x*x");
  for (int t = 0; t < 3; ++t) {
    auto X = random_field(S, g, 2);
    auto Y = random_field(S, g, 2);
    auto one = prolong_sigma({X}, ExprMatrix{{lam}}, 3, S);
    CHECK(same_tables(one[0], prolong_lambda(X, lam, 3, S)));
    auto zero = prolong_sigma({X, Y}, ExprMatrix(2, 2), 3, S);
    CHECK(same_tables(zero[0], prolong_standard(X, 3, S)));
    CHECK(same_tables(zero[1], prolong_standard(Y, 3, S)));
    Expr l2 = P("sin(u)");
    auto diag = prolong_sigma({X, Y}, ExprMatrix::diagonal({lam, l2}), 3, S);
    CHECK(same_tables(diag[0], prolong_lambda(X, lam, 3, S)));
    CHECK(same_tables(diag[1], prolong_lambda(Y, l2, 3, S)));
  }
  CHECK_THROWS_AS(prolong_sigma({field(S, {"0"}, {"1"})}, ExprMatrix(2, 2), 2, S), Error);
}

TEST_CASE("sigma prolongation one step by hand") {
  const auto& S = S1();
  auto X = field(S, {"u"}, {"x"});
  auto Y = field(S, {"0"}, {"u"});
  ExprMatrix sig{{P("x"), P("u_x")}, {Expr(1), Expr(0)}};
  auto V = prolong_sigma({X, Y}, sig, 1, S);
  Oracle o;
  // (psi_1)_1 = D_x x - u_x D_x u + x (x - u_x u) + u_x (u - 0)
  CHECK(o.equal(V[0].psi(0, 1), P("1 - u_x^2 + x*(x - u_x*u) + u_x*u")).holds);
  // (psi_1)_2 = D_x u + 1 * (x - u_x u)
  CHECK(o.equal(V[1].psi(0, 1), P("u_x + x - u_x*u")).holds);
}

TEST_CASE("evolutionary representative") {
  const auto& S = S1();
  Oracle o;
  CHECK(o.equal(evolutionary_representative(field(S, {"1"}, {"0"}), S).phi[0], P("-u_x")).holds);
  CHECK(evolutionary_representative(field(S, {"0"}, {"1"}), S).phi[0] == Expr(1));
  CHECK(o.equal(evolutionary_representative(field(S, {"-u"}, {"x"}), S).phi[0], P("x + u*u_x")).holds);
  auto Q = evolutionary_representative(field(S, {"x*u"}, {"u"}), S);
  CHECK(Q.is_vertical());
  CHECK(o.equal(partial(Q.phi[0], intern("u_x")), -P("x*u")).holds);
}

TEST_CASE("prolongation commutes with the bracket") {
  ExprGen g1(base_leaves(S1()), 51), g2(base_leaves(S2()), 52);
  Oracle o;
  for (int t = 0; t < 6; ++t) {
    for (int which = 0; which < 2; ++which) {
      const JetSpace& S = which ? S2() : S1();
      ExprGen& g = which ? g2 : g1;
      auto X = random_field(S, g, 2), Y = random_field(S, g, 2);
      int k = 1 + t % 4;
      auto lhs = commutator(prolong_standard(X, k, S).as_jet_field(), prolong_standard(Y, k, S).as_jet_field());
      auto rhs = prolong_standard(commutator(X, Y, S), k, S).as_jet_field();
      CHECK(o.all_equal(coefficient_pairs(lhs, rhs)).holds);
    }
  }
}

TEST_CASE("lambda commutator defect") {
  const auto& S = S1();
  Oracle o;
  auto X = field(S, {"0"}, {"x"});
  auto Y = field(S, {"0"}, {"u"});
  auto Z = commutator(X, Y, S);
  CHECK(o.equal(Z.phi[0], P("x")).holds);
  for (const char* l : {"u_x", "x*u_x", "sin(u)"}) {
    Expr lam = P(l);
    auto d = commutator(prolong_lambda(X, lam, 1, S).as_jet_field(), prolong_lambda(Y, lam, 1, S).as_jet_field()) -
             prolong_lambda(Z, lam, 1, S).as_jet_field();
    Expr expect = P("x") * lam + (P("u") - P("x*u_x")) * partial(lam, intern("u_x"));
    CHECK(o.equal(d.coefficient(intern("u_x")), expect).holds);
    CHECK(o.zero(d.coefficient(intern("u"))).holds);
    CHECK(o.zero(d.coefficient(intern("x"))).holds);
  }
}

TEST_CASE("mu path independence") {
  JetSpace T({"x", "y"}, {"u", "v"}, 3);
  // Lambda_i = A^{-1} D_i A for a lower triangular A is flat
  ExprMatrix A{{Expr(1), Expr(0)}, {T.parse("x*u + y"), Expr(1)}};
  ExprMatrix Ai = inverse(A);
  MuTwist flat{{Ai * total_derivative(A, 0, T), Ai * total_derivative(A, 1, T)}};
  REQUIRE(mch_verdict(flat, T).holds);
  auto X = field(T, {"0", "0"}, {"x*v", "u + y"});
  Oracle o;
  auto p1 = prolong_mu_along_path(X, flat, {0, 1}, T);
  auto p2 = prolong_mu_along_path(X, flat, {1, 0}, T);
  CHECK(o.equal(p1[0], p2[0]).holds);
  CHECK(o.equal(p1[1], p2[1]).holds);
  auto q1 = prolong_mu_along_path(X, flat, {0, 1, 1}, T);
  auto q2 = prolong_mu_along_path(X, flat, {1, 0, 1}, T);
  auto q3 = prolong_mu_along_path(X, flat, {1, 1, 0}, T);
  for (int a = 0; a < 2; ++a) {
    CHECK(o.equal(q1[a], q2[a]).holds);
    CHECK(o.equal(q1[a], q3[a]).holds);
  }
  MuTwist bad{{ExprMatrix{{0, 1}, {0, 0}}, ExprMatrix{{0, 0}, {1, 0}}}};
  auto b1 = prolong_mu_along_path(X, bad, {0, 1}, T);
  auto b2 = prolong_mu_along_path(X, bad, {1, 0}, T);
  CHECK_FALSE(o.all_equal(std::vector<ExprPair>{{b1[0], b2[0]}, {b1[1], b2[1]}}).holds);
}

TEST_CASE("mu and standard tables agree where the characteristic jet vanishes") {
  const auto& S = S2();
  ExprGen g(base_leaves(S), 61);
  Oracle o;
  ExprMatrix L{{S.parse("u1_x"), S.parse("x")}, {Expr(2), S.parse("u2*u1")}};
  for (int t = 0; t < 3; ++t) {
    auto X = random_field(S, g, 2);
    X.xi[0] = X.xi[0] * X.xi[0] + Expr(1);  // keep xi away from zero
    auto pts = characteristic_zero_points(X, 3, S, o, 30);
    REQUIRE(pts.size() == 30);
    auto M = prolong_Lambda_ode(X, L, 3, S);
    auto V = prolong_standard(X, 3, S);
    std::vector<ExprPair> pairs;
    for (int a = 0; a < 2; ++a) {
      for (int j = 0; j <= 3; ++j) pairs.emplace_back(M.psi(a, j), V.psi(a, j));
    }
    auto v = o.all_equal_at(pairs, pts);
    CHECK(v.holds);
    CHECK(v.max_residual < 1e-9);
    // away from those points they differ
    CHECK_FALSE(o.all_equal(pairs).holds);
  }
}

TEST_CASE("truncation gives the lower-order prolongation") {
  const auto& S = S1();
  ExprGen g(base_leaves(S), 71);
  for (int t = 0; t < 3; ++t) {
    auto X = random_field(S, g, 2);
    Expr lam = P("u_x + x");
    CHECK(same_tables(prolong_standard(X, 4, S).truncate(3), prolong_standard(X, 3, S)));
    CHECK(same_tables(prolong_lambda(X, lam, 4, S).truncate(3), prolong_lambda(X, lam, 3, S)));
    CHECK(same_tables(prolong_Lambda_ode(X, ExprMatrix{{lam}}, 4, S).truncate(2),
                      prolong_Lambda_ode(X, ExprMatrix{{lam}}, 2, S)));
    auto Y = random_field(S, g, 2);
    ExprMatrix sig{{lam, Expr(1)}, {P("u"), Expr(0)}};
    auto hi = prolong_sigma({X, Y}, sig, 4, S);
    auto lo = prolong_sigma({X, Y}, sig, 3, S);
    CHECK(same_tables(hi[0].truncate(3), lo[0]));
    CHECK(same_tables(hi[1].truncate(3), lo[1]));
  }
}

TEST_CASE("contact preservation characterizes standard prolongations") {
  const auto& S = S1();
  ExprGen g(base_leaves(S), 81);
  Oracle o;
  for (int t = 0; t < 5; ++t) {
    auto X = random_field(S, g, 2);
    CHECK(o.all_zero(annihilates_contact(prolong_standard(X, 2, S))).holds);
  }
  CHECK(o.all_zero(annihilates_contact(prolong_standard(VectorField::zero(S), 2, S))).holds);
  auto bad = annihilates_contact(prolong_lambda(field(S, {"0"}, {"x"}), P("u_x"), 1, S));
  auto v = o.all_zero(bad);
  CHECK_FALSE(v.holds);
  CHECK(v.witness.has_value());
  // two independent variables
  JetSpace T({"x", "y"}, {"u"}, 2);
  ExprGen h(base_leaves(T), 82);
  for (int t = 0; t < 3; ++t) {
    auto X = random_field(T, h, 2);
    CHECK(o.all_zero(annihilates_contact(prolong_standard(X, 2, T))).holds);
  }
}
