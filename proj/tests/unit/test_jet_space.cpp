#include "doctest.h"
#include "jetsym/error.hpp"
#include "jetsym/jet_space.hpp"
#include "jetsym/oracle.hpp"
#include "support.hpp"

using namespace jetsym;
using testing_support::ExprGen;

TEST_CASE("multi-index basics") {
  MultiIndex J{2, 1};
  CHECK(J.order() == 3);
  CHECK(J.last_direction() == 1);
  CHECK(J.path() == std::vector<int>{0, 0, 1});
  CHECK(J.plus(1) == MultiIndex{2, 2});
  CHECK(J.minus(1) == MultiIndex{2, 0});
  CHECK_FALSE(MultiIndex{0, 1}.minus(0).has_value());
  CHECK(MultiIndex{1, 0} < MultiIndex{0, 2});
  CHECK(MultiIndex{2, 0} < MultiIndex{1, 1});
}

TEST_CASE("jet space validation") {
  CHECK_THROWS_AS(JetSpace({}, {"u"}, 1), Error);
  CHECK_THROWS_AS(JetSpace({"x"}, {}, 1), Error);
  CHECK_THROWS_AS(JetSpace({"x"}, {"u"}, -1), Error);
  CHECK_THROWS_AS(JetSpace({"x"}, {"x"}, 1), Error);
  CHECK_THROWS_AS(JetSpace({"x"}, {"exp"}, 1), Error);
}

TEST_CASE("coordinate names and shorthand") {
  JetSpace S({"x", "y"}, {"u", "v"}, 2);
  CHECK(symbol_name(S.coordinate(0, MultiIndex{1, 1})) == "u_xy");
  CHECK(S.parse("u_yx") == S.u(0, MultiIndex{1, 1}));
  CHECK(S.parse("diff(v,y,1,x,1)") == S.u(1, MultiIndex{1, 1}));
  CHECK(S.multi_indices(2).size() == 3);
  CHECK(S.coordinates(1).size() == 2 + 2 * 3);
  CHECK(S.order_of(S.parse("x*u_xy + v")) == 2);
  CHECK(S.order_of(S.parse("x*y")) == -1);
  CHECK_THROWS_AS(S.coordinate(0, MultiIndex{2, 1}), Error);
  auto c = S.jet(S.coordinate(1, MultiIndex{0, 2}));
  REQUIRE(c.has_value());
  CHECK(c->dependent == 1);
  CHECK(c->index == MultiIndex{0, 2});
}

TEST_CASE("total derivative examples") {
  JetSpace S({"x"}, {"u"}, 3);
  auto P = [&](const char* s) { return S.parse(s); };
  CHECK(total_derivative(P("u"), 0, S) == P("u_x"));
  CHECK(Oracle().equal(total_derivative(P("x*u_x"), 0, S), P("u_x + x*u_xx")).holds);
  CHECK(Oracle().equal(total_derivative(P("u_x*exp(u)"), 0, S),
                       P("u_xx*exp(u) + u_x^2*exp(u)")).holds);
  CHECK_THROWS_AS(total_derivative(P("u_xxx"), 0, S), Error);
  try {
    total_derivative(P("u_xxx"), 0, S);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::order_overflow);
  }
}

TEST_CASE("total derivative along a sampled section") {
  // u(x) = sin(2x) + x^3; D_x of F(x,u,u_x) must match d/dx F(x,u(x),u'(x)).
  JetSpace S({"x"}, {"u"}, 2);
  Expr F = S.parse("u_x*exp(u) + x*u^2");
  Expr DF = total_derivative(F, 0, S);
  auto section = [](double x, double& u, double& ux, double& uxx) {
    u = std::sin(2 * x) + x * x * x;
    ux = 2 * std::cos(2 * x) + 3 * x * x;
    uxx = -4 * std::sin(2 * x) + 6 * x;
  };
  auto F_along = [&](double x) {
    double u, ux, uxx;
    section(x, u, ux, uxx);
    return evaluate(F, {{"x", x}, {"u", u}, {"u_x", ux}});
  };
  for (double x : {-1.1, -0.3, 0.4, 0.9}) {
    double u, ux, uxx;
    section(x, u, ux, uxx);
    double h = 1e-5;
    double fd = (F_along(x + h) - F_along(x - h)) / (2 * h);
    double v = evaluate(DF, {{"x", x}, {"u", u}, {"u_x", ux}, {"u_xx", uxx}});
    CHECK(std::abs(fd - v) < 1e-6 * (1 + std::abs(v)));
  }
}

TEST_CASE("multi-index total derivatives") {
  JetSpace S({"x", "y"}, {"u"}, 3);
  auto P = [&](const char* s) { return S.parse(s); };
  CHECK(total_derivative(P("x*u"), MultiIndex{0, 0}, S) == P("x*u"));
  CHECK(total_derivative(P("u"), MultiIndex{2, 0}, S) == P("u_xx"));
  CHECK(total_derivative(P("x*y"), MultiIndex{1, 1}, S) == Expr(1));
}

TEST_CASE("total derivatives commute and obey Leibniz") {
  JetSpace S({"x", "y"}, {"u", "v"}, 4);
  ExprGen g({S.x(0), S.x(1), S.u(0), S.u(1), S.parse("u_x"), S.parse("v_y"), S.parse("u_xy")}, 21);
  Oracle o;
  for (int t = 0; t < 30; ++t) {
    Expr e = g(3);
    Expr dxy = total_derivative(total_derivative(e, 1, S), 0, S);
    Expr dyx = total_derivative(total_derivative(e, 0, S), 1, S);
    CHECK(o.equal(dxy, dyx).holds);
    Expr f = g(3);
    for (int i = 0; i < 2; ++i) {
      CHECK(o.equal(total_derivative(e * f, i, S),
                    e * total_derivative(f, i, S) + f * total_derivative(e, i, S)).holds);
    }
  }
}

TEST_CASE("total derivative of a base function is its partial") {
  JetSpace S({"x", "y"}, {"u"}, 1);
  ExprGen g({S.x(0), S.x(1)}, 8);
  for (int t = 0; t < 30; ++t) {
    Expr e = g(4);
    for (int i = 0; i < 2; ++i) {
      CHECK(total_derivative(e, i, S) == partial(e, S.independent(i)));
    }
  }
}

TEST_CASE("contact forms") {
  JetSpace S1({"x"}, {"u"}, 1);
  auto w = contact_forms(S1);
  REQUIRE(w.size() == 1);
  CHECK(w[0].coefficients.size() == 2);
  CHECK(w[0].coefficients[0].first == intern("u"));
  CHECK(w[0].coefficients[0].second == Expr(1));
  CHECK(w[0].coefficients[1].first == intern("x"));
  CHECK(w[0].coefficients[1].second == -S1.parse("u_x"));

  JetSpace S2({"x", "y"}, {"u"}, 1);
  auto w2 = contact_forms(S2);
  REQUIRE(w2.size() == 1);
  CHECK(w2[0].coefficients.size() == 3);
  CHECK(w2[0].coefficients[2].second == -S2.parse("u_y"));

  CHECK(contact_forms(JetSpace({"x"}, {"u"}, 0)).empty());
  CHECK(contact_forms(JetSpace({"x"}, {"u", "v"}, 3)).size() == 6);
}
