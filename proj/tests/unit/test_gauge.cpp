#include "doctest.h"
#include "jetsym/error.hpp"
#include "jetsym/gauge.hpp"
#include "support.hpp"

using namespace jetsym;
using testing_support::ExprGen;
using testing_support::random_gauge;

namespace {

const JetSpace& S1() {
  static const JetSpace S({"x"}, {"u"}, 6);
  return S;
}

const JetSpace& S2() {
  static const JetSpace S({"x"}, {"u1", "u2"}, 6);
  return S;
}

const JetSpace& P2() {
  static const JetSpace S({"x", "y"}, {"u1", "u2"}, 5);
  return S;
}

std::vector<Expr> leaves(const JetSpace& S) {
  std::vector<Expr> l;
  for (int i = 0; i < S.n(); ++i) l.push_back(S.x(i));
  for (int a = 0; a < S.m(); ++a) l.push_back(S.u(a));
  return l;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("mu from gauge examples") {
  Oracle o;
  auto id = mu_from_gauge(ExprMatrix::identity(2), S2());
  REQUIRE(id.Lambda.size() == 1);
  for (const auto& e : id.Lambda[0].entries()) CHECK(e.is_zero());
  auto ex = mu_from_gauge(ExprMatrix{{exp(S1().x())}}, S1());
  CHECK(o.equal(ex.Lambda[0](0, 0), Expr(1)).holds);
  auto uu = mu_from_gauge(ExprMatrix{{S1().u()}}, S1());
  CHECK(o.equal(uu.Lambda[0](0, 0), S1().parse("u_x/u")).holds);
  CHECK(code_of([] { mu_from_gauge(ExprMatrix{{Expr(0)}}, S1()); }) == Errc::singular_at_sample);
  CHECK(code_of([] { mu_from_gauge(ExprMatrix{{S1().x(), S1().x()}, {S1().u(), S1().u()}}, S2()); }) ==
        Errc::singular_at_sample);
  CHECK(code_of([] { mu_from_gauge(ExprMatrix::identity(3), S2()); }) == Errc::size_mismatch);
}

TEST_CASE("sigma from gauge examples") {
  Oracle o;
  auto id = sigma_from_gauge(ExprMatrix::identity(2), S1());
  for (const auto& e : id.sigma.entries()) CHECK(e.is_zero());
  auto ex = sigma_from_gauge(ExprMatrix{{exp(S1().x())}}, S1());
  CHECK(o.equal(ex.sigma(0, 0), Expr(1)).holds);
  auto c = sigma_from_gauge(ExprMatrix{{2, 1}, {1, 1}}, S1());
  for (const auto& e : c.sigma.entries()) CHECK(e.is_zero());
}

TEST_CASE("factor order: the inverse must stand on the left for a noncommuting pure gauge") {
  // A = [[1, x], [0, 1]]; with A^{-1}DA and (DA)A^{-1} different once A and DA
  // do not commute, use an A with that property
  const auto& S = S2();
  ExprMatrix A{{S.u(0), Expr(0)}, {S.x(), Expr(1)}};
  auto mu = mu_from_gauge(A, S);
  auto X = VectorField::vertical({S.parse("u1*u2"), S.parse("x + u1")}, S);
  auto V = prolong_Lambda_ode(X, mu.Lambda[0], 3, S);
  auto W = prolong_standard(VectorField::vertical(A * X.phi, S), 3, S);
  Oracle o;
  for (int j = 0; j <= 3; ++j) {
    auto Apsi = A * std::vector<Expr>{V.psi(0, j), V.psi(1, j)};
    CHECK(o.equal(Apsi[0], W.psi(0, j)).holds);
    CHECK(o.equal(Apsi[1], W.psi(1, j)).holds);
  }
  // the other order breaks the diagram
  ExprMatrix right = total_derivative(A, 0, S) * inverse(A);
  auto V2 = prolong_Lambda_ode(X, right, 1, S);
  auto Apsi = A * std::vector<Expr>{V2.psi(0, 1), V2.psi(1, 1)};
  CHECK_FALSE(o.all_equal(std::vector<ExprPair>{{Apsi[0], W.psi(0, 1)}, {Apsi[1], W.psi(1, 1)}}).holds);
}

TEST_CASE("pure gauge twists are flat") {
  ExprGen g(leaves(P2()), 11);
  Oracle o = Oracle().with_trials(200);
  for (int t = 0; t < 6; ++t) {
    auto A = random_gauge(g, 2);
    auto mu = mu_from_gauge(A, P2());
    CHECK(mch_verdict(mu, P2(), o).holds);
    // the opposite factor order is not flat in general
    MuTwist other;
    for (int i = 0; i < 2; ++i) other.Lambda.push_back(total_derivative(A, i, P2()) * inverse(A));
    if (t == 0) CHECK_FALSE(mch_verdict(other, P2(), o).holds);
  }
}

TEST_CASE("mu gauge diagram") {
  const auto& S = S1();
  auto r = verify_gauge_diagram_mu(VectorField::vertical({S.parse("x*u")}, S), ExprMatrix::identity(1), 3, S);
  CHECK(r.verdict.holds);
  CHECK(r.verdict.max_residual < 1e-12);
  ExprGen g(leaves(S), 3);
  for (int t = 0; t < 4; ++t) {
    auto X = VectorField::vertical({g.polynomial(2)}, S);
    CHECK(verify_gauge_diagram_mu(X, ExprMatrix{{exp(S.x())}}, 3, S).verdict.holds);
  }
  ExprGen g2(leaves(S2()), 5);
  for (int t = 0; t < 4; ++t) {
    auto X = VectorField::vertical({g2.polynomial(2), g2.polynomial(2)}, S2());
    auto rep = verify_gauge_diagram_mu(X, random_gauge(g2, 2), 4, S2());
    CHECK(rep.verdict.max_residual < 1e-8);
  }
  // two independent variables: the recursion runs along canonical paths
  ExprGen g3(leaves(P2()), 9);
  auto X = VectorField::vertical({g3.polynomial(2), g3.polynomial(2)}, P2());
  CHECK(verify_gauge_diagram_mu(X, random_gauge(g3, 2), 3, P2()).verdict.holds);
  CHECK(code_of([&] { verify_gauge_diagram_mu(VectorField{{Expr(1)}, {Expr(0)}}, ExprMatrix::identity(1), 2, S); }) ==
        Errc::non_vertical_input);
}

TEST_CASE("sigma gauge diagram") {
  const auto& S = S1();
  std::vector<VectorField> Xs{VectorField::vertical({Expr(1)}, S), VectorField::vertical({S.u()}, S)};
  CHECK(verify_gauge_diagram_sigma(Xs, ExprMatrix::identity(2), 3, S).verdict.holds);
  ExprGen g(leaves(S), 21);
  for (int t = 0; t < 4; ++t) CHECK(verify_gauge_diagram_sigma(Xs, random_gauge(g, 2), 2, S).verdict.holds);
  // non-vertical fields and r = 3
  std::vector<VectorField> Zs{VectorField{{Expr(1)}, {Expr(0)}}, VectorField{{S.x()}, {S.u()}},
                              VectorField{{Expr(0)}, {S.parse("x^2")}}};
  CHECK(verify_gauge_diagram_sigma(Zs, random_gauge(g, 3), 4, S).verdict.max_residual < 1e-8);
  CHECK(code_of([&] { verify_gauge_diagram_sigma(Xs, ExprMatrix{{1, 1}, {1, 1}}, 2, S); }) == Errc::singular_at_sample);
}

TEST_CASE("scalar sigma gauge is the lambda twist a'/a") {
  const auto& S = S1();
  Expr a = S.parse("2 + sin(x)");
  auto sg = sigma_from_gauge(ExprMatrix{{a}}, S);
  Oracle o;
  CHECK(o.equal(sg.sigma(0, 0), S.parse("cos(x)/(2 + sin(x))")).holds);
  auto X = VectorField{{S.parse("x")}, {S.parse("u^2")}};
  auto Y = prolong_sigma({X}, sg.sigma, 3, S)[0];
  auto L = prolong_lambda(X, sg.sigma(0, 0), 3, S);
  auto pairs = coefficient_pairs(Y, L);
  CHECK(o.all_equal(pairs).holds);
  CHECK(verify_gauge_diagram_sigma({X}, ExprMatrix{{a}}, 3, S).verdict.holds);
}
