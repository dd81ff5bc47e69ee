#include <cmath>
#include <sstream>

#include "doctest.h"
#include "jetsym/error.hpp"
#include "jetsym/expr.hpp"
#include "jetsym/jet_space.hpp"
#include "jetsym/oracle.hpp"
#include "jetsym/program.hpp"
#include "support.hpp"

using namespace jetsym;
using testing_support::ExprGen;

namespace {

const JetSpace& space() {
  static const JetSpace S({"x"}, {"u"}, 3, {"a"});
  return S;
}

Expr P(const char* s) { return space().parse(s); }

Errc parse_error_code(const char* s) {
  try {
    P(s);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::overflow;  // sentinel: no error
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(6, -4) == Rational(-3, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(2, 3).pow(-2) == Rational(9, 4));
  CHECK(Rational(9, 4).root(2) == Rational(3, 2));
  CHECK_FALSE(Rational(2).root(2).has_value());
  CHECK(Rational::from_string("0.125") == Rational(1, 8));
  CHECK(Rational::from_string("-3/4") == Rational(-3, 4));
  CHECK(Rational::from_string("1e-3") == Rational(1, 1000));
  CHECK_FALSE(Rational::from_string("1..2").has_value());
  CHECK(Rational::approximate(0.33333333, 12, 1e-6) == Rational(1, 3));
  CHECK_FALSE(Rational::approximate(0.123456, 12, 1e-6).has_value());
  CHECK_THROWS_AS(Rational(1, 0), Error);
  Rational big(std::int64_t{1} << 62);
  CHECK_THROWS_AS(big * big, Error);
}

TEST_CASE("parse grammar cases") {
  Expr ux = Expr::symbol("u_x");
  CHECK(P("u_x^2 + 1") == pow(ux, 2) + Expr(1));
  CHECK(P("diff(u,x,2)") == Expr::symbol("u_xx"));
  CHECK(P("diff(u,x,1,x,1)") == Expr::symbol("u_xx"));
  CHECK(P("  2 * x ") == Expr(2) * Expr::symbol("x"));
  CHECK(P("x^-1") == pow(Expr::symbol("x"), -1));
  CHECK(P("-x^2") == -pow(Expr::symbol("x"), 2));
  CHECK(P("a*u") == Expr::symbol("a") * Expr::symbol("u"));
  CHECK(P("sqrt(4)") == Expr(2));
  CHECK(P("1.5e1") == Expr(15));
}

TEST_CASE("parse errors") {
  CHECK(parse_error_code("exp(lam*x)") == Errc::unknown_symbol);
  CHECK(parse_error_code("foo(x)") == Errc::unknown_function);
  CHECK(parse_error_code("x +") == Errc::syntax);
  CHECK(parse_error_code("x^u") == Errc::syntax);
  CHECK(parse_error_code("(x") == Errc::syntax);
  CHECK(parse_error_code("u_xxxx") == Errc::unknown_symbol);  // beyond max order
  try {
    P("x + * u");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("partial derivative examples") {
  Expr ux = Expr::symbol("u_x");
  CHECK(partial(pow(ux, 2), intern("u_x")) == Expr(2) * ux);
  CHECK(partial(P("x*u"), intern("u_x")).is_zero());
  Expr e = P("exp(x*u)");
  Expr d = partial(e, intern("x"));
  CHECK(Oracle().equal(d, P("u*exp(x*u)")).holds);
  // finite differences at 20 points
  ExprGen g({}, 11);
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    EvalPoint p{{"x", g.uniform(-1.5, 1.5)}, {"u", g.uniform(-1.5, 1.5)}};
    double fd = 0;
    REQUIRE(testing_support::central_difference(e, p, intern("x"), 1e-6, fd));
    CHECK(std::abs(fd - evaluate(d, p)) <= 1e-6 * (1 + std::abs(fd)));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("substitute examples") {
  Expr w = Expr::symbol("w");
  CHECK(substitute(P("u_x + u"), {{intern("u_x"), w}}) == w + P("u"));
  CHECK(substitute(P("x"), {}) == P("x"));
  CHECK(substitute(P("u_xx"), {{intern("u_xx"), P("u_x^2 + u_x")}}) == P("u_x^2 + u_x"));
  // simultaneous, not iterated
  CHECK(substitute(P("x + u"), {{intern("x"), P("u")}, {intern("u"), P("x")}}) == P("u + x"));
}

TEST_CASE("evaluate examples") {
  CHECK(evaluate(P("u_x^2"), {{"u_x", 3}}) == doctest::Approx(9));
  CHECK_THROWS_AS(evaluate(P("x/u"), {{"x", 1}, {"u", 0}}), Error);
  CHECK(evaluate(P("sin(0)"), {}) == 0);
  CHECK_THROWS_AS(evaluate(P("log(x)"), {{"x", -1}}), Error);
  CHECK_THROWS_AS(evaluate(P("x"), {}), Error);
}

TEST_CASE("equal_numeric examples") {
  CHECK(equal_numeric(P("u+u"), P("2*u"), 50, 1e-9));
  CHECK_FALSE(equal_numeric(P("u_x"), P("u"), 50, 1e-9));
  CHECK(equal_numeric(P("sin(x)^2 + cos(x)^2"), Expr(1), 50, 1e-9));
  CHECK(equal_numeric(P("(x+u)^2"), P("x^2 + 2*x*u + u^2")));
  CHECK_THROWS_AS(Oracle().with_trials(0).zero(P("x")), Error);
  try {
    Oracle().zero(P("log(-x^2-1)"));
    FAIL("expected persistent domain failure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::persistent_domain_failure);
  }
}

TEST_CASE("oracle is seed deterministic and reports witnesses") {
  Oracle o;
  auto v1 = o.equal(P("x^3"), P("x^3 + 1e-3*u"));
  auto v2 = o.equal(P("x^3"), P("x^3 + 1e-3*u"));
  CHECK_FALSE(v1.holds);
  REQUIRE(v1.witness.has_value());
  CHECK(v1.witness->point == v2.witness->point);
  CHECK(v1.max_residual == v2.max_residual);
  auto v3 = o.with_seed(7).equal(P("x^3"), P("x^3 + 1e-3*u"));
  CHECK(v3.witness->point != v1.witness->point);
}

TEST_CASE("sampler draws nonzero small rationals in range") {
  Sampler s(5);
  for (int i = 0; i < 2000; ++i) {
    double v = s.draw();
    CHECK(std::abs(v) >= 1.0 / 64 - 1e-15);
    CHECK(std::abs(v) <= 2.0);
    CHECK(Rational::approximate(v, 64, 1e-12).has_value());
  }
}

TEST_CASE("canonicalization is idempotent") {
  ExprGen g({P("x"), P("u"), P("u_x")}, 3);
  for (int t = 0; t < 200; ++t) {
    Expr e = g(5);
    Expr once = testing_support::rebuild(e);
    CHECK(once == e);
    CHECK(testing_support::rebuild(once) == once);
  }
}

TEST_CASE("partial is linear") {
  ExprGen g({P("x"), P("u"), P("u_x")}, 4);
  Oracle o;
  for (int t = 0; t < 40; ++t) {
    Expr e1 = g(4), e2 = g(4);
    Expr a = Expr(Rational(g.pick(19) - 9, 1 + g.pick(5)));
    for (const char* s : {"x", "u", "u_x"}) {
      SymbolId id = intern(s);
      CHECK(o.equal(partial(a * e1 + e2, id), a * partial(e1, id) + partial(e2, id)).holds);
    }
  }
}

TEST_CASE("partial agrees with central differences") {
  ExprGen g({P("x"), P("u"), P("u_x")}, 5);
  std::vector<SymbolId> syms{intern("x"), intern("u"), intern("u_x")};
  int compared = 0;
  for (int t = 0; t < 150; ++t) {
    Expr e = g(5);
    for (auto s : syms) {
      Expr d = partial(e, s);
      EvalPoint p = testing_support::random_point(syms, g);
      double f = 0, dv = 0, fd = 0;
      if (!testing_support::try_eval(e, p, f) || std::abs(f) > 1e4) continue;
      if (!testing_support::try_eval(d, p, dv) || std::abs(dv) > 1e4) continue;
      if (!testing_support::central_difference(e, p, s, 1e-6, fd)) continue;
      ++compared;
      CHECK(std::abs(fd - dv) <= 1e-5 * (1 + std::abs(dv)));
    }
  }
  CHECK(compared > 200);
}

TEST_CASE("print then parse round trip") {
  ExprGen g({P("x"), P("u"), P("u_x")}, 6);
  Oracle o;
  for (int t = 0; t < 200; ++t) {
    Expr e = g(5);
    Expr back = P(e.str().c_str());
    CHECK_MESSAGE(o.equal(e, back).holds, e.str());
  }
}

TEST_CASE("negated sum inside a sum keeps its parentheses") {
  Expr e = Expr(1) - (P("x") + Expr(1) / (Expr(2) + P("u_x^2")));
  CHECK(e.str() == "1 - (x + (2 + u_x^2)^(-1))");
  CHECK(Oracle().equal(P(e.str().c_str()), e).holds);
  CHECK(P("x - 1/2").str() == "-1/2 + x");
}

TEST_CASE("derive applies a vector field in one pass") {
  Expr e = P("x*u^2 + sin(u_x)");
  Bindings d{{intern("x"), Expr(1)}, {intern("u"), P("u_x")}, {intern("u_x"), P("u_xx")}};
  Expr expect = P("u^2 + 2*x*u*u_x + cos(u_x)*u_xx");
  CHECK(Oracle().equal(derive(e, d), expect).holds);
}

TEST_CASE("program evaluates batches and flags singularities") {
  std::vector<Expr> es{P("x+u"), P("1/x"), P("sqrt(u)")};
  Program prog(es);
  REQUIRE(prog.inputs().size() == 2);
  std::vector<double> out(3);
  std::vector<double> in(2);
  // inputs sorted by id; set both via names
  for (std::size_t i = 0; i < 2; ++i) in[i] = symbol_name(prog.inputs()[i]) == "x" ? 2.0 : 4.0;
  REQUIRE(prog.run(in, out));
  CHECK(out[0] == doctest::Approx(6));
  CHECK(out[1] == doctest::Approx(0.5));
  CHECK(out[2] == doctest::Approx(2));
  for (std::size_t i = 0; i < 2; ++i) in[i] = symbol_name(prog.inputs()[i]) == "x" ? 0.0 : 4.0;
  CHECK_FALSE(prog.run(in, out));
}
