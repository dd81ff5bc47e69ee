#include "doctest.h"
#include "jetsym/dynsys.hpp"
#include "jetsym/error.hpp"
#include "jetsym/fit.hpp"

using namespace jetsym;

namespace {

const JetSpace& D2() {
  static const JetSpace S({"t"}, {"x", "y"}, 3);
  return S;
}

const JetSpace& D1() {
  static const JetSpace S({"t"}, {"x"}, 3);
  return S;
}

Expr P(const char* s) { return D2().parse(s); }

VectorField vf(std::vector<const char*> phi, const JetSpace& S = D2()) {
  std::vector<Expr> v;
  for (auto s : phi) v.push_back(S.parse(s));
  return VectorField::vertical(v, S);
}

SymmetryAlgebra diagonal_algebra() {
  SymmetryAlgebra alg;
  alg.fields = {vf({"x", "0"}), vf({"0", "y"})};
  alg.structure = structure_constants(alg.fields, D2());
  return alg;
}

}  // namespace

TEST_CASE("dynamical system validation") {
  CHECK_THROWS_AS(DynamicalSystem(D2(), {P("x*t"), P("y")}), Error);
  CHECK_THROWS_AS(DynamicalSystem(D2(), {P("x_t"), P("y")}), Error);
  CHECK_THROWS_AS(DynamicalSystem(D2(), {P("x")}), Error);
  DynamicalSystem ds(D2(), {P("x"), P("-y")});
  CHECK(ds.as_diffeq().order() == 1);
}

TEST_CASE("structure constants and certification") {
  auto alg = diagonal_algebra();
  for (auto& a : alg.structure)
    for (auto& b : a)
      for (auto& c : b) CHECK(c.is_zero());
  SymmetryAlgebra aff;
  aff.fields = {vf({"1"}, D1()), vf({"x"}, D1())};
  aff.structure = structure_constants(aff.fields, D1());
  CHECK(aff.structure[0][1][0] == Rational(1));
  CHECK(aff.structure[1][0][0] == Rational(-1));
  CHECK(certify_algebra(aff, D1()).holds());
  auto broken = aff;
  broken.structure[0][1][0] = Rational(2);
  CHECK_FALSE(certify_algebra(broken, D1()).holds());
  CHECK_FALSE(certify_algebra(broken, D1()).antisymmetric);
  // sl(2): d_x, x d_x, x^2 d_x
  SymmetryAlgebra sl2;
  sl2.fields = {vf({"1"}, D1()), vf({"x"}, D1()), vf({"x^2"}, D1())};
  sl2.structure = structure_constants(sl2.fields, D1());
  auto c = certify_algebra(sl2, D1());
  CHECK(c.jacobi);
  CHECK(c.holds());
  CHECK(sl2.structure[0][2][1] == Rational(2));
  CHECK_THROWS_AS(structure_constants({vf({"1"}, D1()), vf({"x^3"}, D1())}, D1()), Error);
}

TEST_CASE("sigma from perturbation") {
  auto alg = diagonal_algebra();
  auto s0 = sigma_from_perturbation(alg, {Expr(2), Expr(3)}, D2());
  for (const auto& e : s0.entries()) CHECK(e.is_zero());
  Oracle o;
  auto s1 = sigma_from_perturbation(alg, {P("x*y"), P("x^2")}, D2());
  CHECK(o.equal(s1(0, 0), P("x*y")).holds);
  CHECK(o.equal(s1(0, 1), P("2*x^2")).holds);
  CHECK(o.equal(s1(1, 0), P("x*y")).holds);
  CHECK(s1(1, 1).is_zero());
  // d = 1, X1 = d_x, X2 = x d_x, c^1_12 = 1; F1 = x, F2 = x^2, by hand:
  // s_1^1 = c^1_{12} F^2 + X1(F1) = x^2 + 1, s_1^2 = X1(F2) = 2x,
  // s_2^1 = c^1_{21} F^1 + X2(F1) = -x + x = 0, s_2^2 = X2(F2) = 2x^2
  SymmetryAlgebra aff;
  aff.fields = {vf({"1"}, D1()), vf({"x"}, D1())};
  aff.structure = structure_constants(aff.fields, D1());
  auto s2 = sigma_from_perturbation(aff, {D1().parse("x"), D1().parse("x^2")}, D1());
  CHECK(o.equal(s2(0, 0), D1().parse("x^2 + 1")).holds);
  CHECK(o.equal(s2(0, 1), D1().parse("2*x")).holds);
  CHECK(o.zero(s2(1, 0)).holds);
  CHECK(o.equal(s2(1, 1), D1().parse("2*x^2")).holds);
}

TEST_CASE("perturbed systems") {
  DynamicalSystem ds(D2(), {P("x"), P("-y")});
  SymmetryAlgebra one;
  one.fields = {vf({"x", "y"})};
  one.structure = structure_constants(one.fields, D2());
  auto g = perturbed_system(ds, one, {P("x*y")});
  Oracle o;
  CHECK(o.equal(g.f()[0], P("x + x^2*y")).holds);
  CHECK(o.equal(g.f()[1], P("-y + x*y^2")).holds);
  auto same = perturbed_system(ds, one, {Expr(0)});
  CHECK(o.equal(same.f()[0], P("x")).holds);
  DynamicalSystem zero(D2(), {Expr(0), Expr(0)});
  auto h = perturbed_system(zero, one, {Expr(1)});
  CHECK(o.equal(h.f()[1], P("y")).holds);
}

TEST_CASE("perturbation symmetries on the abelian example") {
  DynamicalSystem ds(D2(), {P("x"), P("-y")});
  auto alg = diagonal_algebra();
  auto r0 = verify_perturbation_symmetries(ds, alg, {Expr(0), Expr(0)}, 2);
  CHECK(r0.passed());
  CHECK_FALSE(r0.standard_fails());
  for (int k = 1; k <= 3; ++k) {
    auto r = verify_perturbation_symmetries(ds, alg, {P("x*y"), P("x*y")}, k);
    CHECK(r.involution.max_residual < 1e-8);
    CHECK(r.tangency.max_residual < 1e-8);
    CHECK(r.passed());
    CHECK(r.standard_fails());
  }
  // transposed sigma as a negative control needs F^1 != F^2
  std::vector<Expr> F{P("x*y"), P("x^2*y^2")};
  auto good = verify_perturbation_symmetries(ds, alg, F, 1);
  CHECK(good.passed());
  PerturbationOptions neg;
  neg.sigma = sigma_from_perturbation(alg, F, D2()).transpose();
  auto bad = verify_perturbation_symmetries(ds, alg, F, 1, neg);
  CHECK_FALSE(bad.tangency.holds);
  CHECK(bad.tangency.witness.has_value());
}

TEST_CASE("perturbation symmetry preconditions") {
  DynamicalSystem ds(D2(), {P("x"), P("-y^2")});
  auto alg = diagonal_algebra();
  CHECK_THROWS_AS(verify_perturbation_symmetries(ds, alg, {Expr(0), Expr(0)}, 1), Error);
  auto wrong = alg;
  wrong.structure[0][1][0] = Rational(1);
  wrong.structure[1][0][0] = Rational(-1);
  DynamicalSystem lin(D2(), {P("x"), P("-y")});
  CHECK_THROWS_AS(verify_perturbation_symmetries(lin, wrong, {Expr(0), Expr(0)}, 1), Error);
}

TEST_CASE("perturbation symmetries with a non-abelian algebra") {
  // f = 0 is symmetric under any field; X1 = d_x, X2 = x d_x
  DynamicalSystem ds(D1(), {Expr(0)});
  SymmetryAlgebra aff;
  aff.fields = {vf({"1"}, D1()), vf({"x"}, D1())};
  aff.structure = structure_constants(aff.fields, D1());
  for (int k = 1; k <= 3; ++k) {
    auto r = verify_perturbation_symmetries(ds, aff, {D1().parse("x"), D1().parse("x^2")}, k);
    CHECK(r.involution.holds);
    CHECK(r.tangency.holds);
  }
}

TEST_CASE("normal form instances") {
  auto a = normal_form_instance({Rational(1), Rational(-1)}, 4);
  REQUIRE(a.invariants.size() == 1);
  CHECK(a.invariants[0] == P("x*y"));
  CHECK(a.alg.fields.size() == 2);
  CHECK(certify_algebra(a.alg, a.ds.space()).holds());
  auto b = normal_form_instance({Rational(1), Rational(2)}, 3);
  REQUIRE(b.invariants.size() == 1);
  CHECK(b.invariants[0] == Expr(1));
  auto c = normal_form_instance({Rational(1), Rational(1)});
  CHECK(c.alg.fields.size() == 4);
  CHECK(certify_algebra(c.alg, c.ds.space()).holds());
  auto d = normal_form_instance({Rational(1), Rational(-1), Rational(2)}, 4);
  // generators: xy, x^2 z^... no: k1 - k2 + 2 k3 = 0 gives xy and y^2 z
  CHECK(d.invariants.size() == 2);
  // every instance with polynomial F in the invariants passes
  const auto& S = a.ds.space();
  Expr I = a.invariants[0];
  for (int k = 1; k <= 3; ++k) {
    auto r = verify_perturbation_symmetries(a.ds, a.alg, {I + I * I, Expr(Rational(1, 2)) * I}, k, {Oracle().with_tol(1e-8), {}});
    CHECK(r.passed());
  }
  (void)S;
}

TEST_CASE("perturbed system without standard symmetries in a quadratic ansatz") {
  DynamicalSystem ds(D2(), {P("x"), P("-y")});
  auto alg = diagonal_algebra();
  std::vector<Expr> F{P("y^2"), P("x^2")};
  auto r = verify_perturbation_symmetries(ds, alg, F, 1);
  CHECK(r.passed());
  auto pert = perturbed_system(ds, alg, F);
  auto basis = monomials({D2().x(), D2().u(0), D2().u(1)}, 2);
  AnsatzProblem prob{{}, {{}, basis, basis}};
  auto sol = solve_determining_ansatz(pert.as_diffeq(), prob, NoTwist{});
  CHECK(sol.fields.empty());
  // the unperturbed system has x d_x and y d_y in the same ansatz
  auto lin = solve_determining_ansatz(ds.as_diffeq(), prob, NoTwist{});
  CHECK(lin.fields.size() >= 2);
  for (const auto& c : lin.certificates) CHECK(c.holds);
}
