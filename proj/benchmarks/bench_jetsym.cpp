#include <benchmark/benchmark.h>

#include "jetsym/dynsys.hpp"
#include "jetsym/fit.hpp"
#include "jetsym/invariants.hpp"
#include "jetsym/selftest.hpp"
#include "jetsym/variational.hpp"

using namespace jetsym;

namespace {

const JetSpace& ode(int k = 8) {
  static const JetSpace S({"x"}, {"u"}, k);
  return S;
}

VectorField projective() {
  const auto& S = ode();
  return VectorField{{S.parse("x^2 + x*u")}, {S.parse("x*u + u^2")}};
}

}  // namespace

static void BM_ProlongStandard(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto X = projective();
  for (auto _ : state) benchmark::DoNotOptimize(prolong_standard(X, k, ode()));
}
BENCHMARK(BM_ProlongStandard)->DenseRange(1, 6);

static void BM_ProlongLambda(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto X = projective();
  Expr lam = ode().parse("u_x*sin(u) + x");
  for (auto _ : state) benchmark::DoNotOptimize(prolong_lambda(X, lam, k, ode()));
}
BENCHMARK(BM_ProlongLambda)->DenseRange(1, 6);

static void BM_ProlongMu(benchmark::State& state) {
  static const JetSpace T({"x", "y"}, {"u1", "u2"}, 5);
  MuTwist mu{{ExprMatrix{{T.parse("u1_x"), Expr(0)}, {Expr(0), T.parse("x")}},
              ExprMatrix{{T.parse("u1_y"), Expr(0)}, {Expr(0), Expr(0)}}}};
  auto X = VectorField::vertical({T.parse("x*u2"), T.parse("u1 + y")}, T);
  MuOptions opt;
  opt.unchecked = true;
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(prolong_mu(X, mu, k, T, opt));
}
BENCHMARK(BM_ProlongMu)->DenseRange(1, 4);

static void BM_OracleBracketIdentity(benchmark::State& state) {
  const auto& S = ode();
  auto X = projective();
  VectorField Y{{S.parse("1")}, {S.parse("x*u")}};
  auto lhs = commutator(prolong_standard(X, 4, S).as_jet_field(), prolong_standard(Y, 4, S).as_jet_field());
  auto rhs = prolong_standard(commutator(X, Y, S), 4, S).as_jet_field();
  auto pairs = coefficient_pairs(lhs, rhs);
  Oracle o({kDefaultSeed, static_cast<int>(state.range(0)), 1e-9});
  for (auto _ : state) benchmark::DoNotOptimize(o.all_equal(pairs));
}
BENCHMARK(BM_OracleBracketIdentity)->Arg(50)->Arg(200);

static void BM_AnsatzFreeParticle(benchmark::State& state) {
  const auto& S = ode(4);
  DiffEq free(ode(4), {SolvedEntry{0, MultiIndex{2}, Expr(0)}});
  auto basis = monomials({S.x(), S.u()}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(solve_determining_ansatz(free, AnsatzProblem{basis, {}}, NoTwist{}));
}
BENCHMARK(BM_AnsatzFreeParticle)->Unit(benchmark::kMillisecond);

static void BM_InvariantChain(benchmark::State& state) {
  const auto& S = ode();
  auto V = prolong_lambda(VectorField::vertical({Expr(1)}, S), S.parse("u_x"), 5, S);
  const int target = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(generate_invariant_chain({V}, S.x(), S.parse("u_x*exp(-u)"), target, S));
}
BENCHMARK(BM_InvariantChain)->DenseRange(2, 5);

static void BM_ReduceOde(benchmark::State& state) {
  const auto& S = ode(6);
  DiffEq eq(S, {SolvedEntry{0, MultiIndex{2}, S.parse("u_x^2 + u_x")}});
  for (auto _ : state) benchmark::DoNotOptimize(reduce_ode(eq, S.x(), S.parse("u_x*exp(-u)")));
}
BENCHMARK(BM_ReduceOde)->Unit(benchmark::kMillisecond);

static void BM_NormalFormPerturbation(benchmark::State& state) {
  auto inst = normal_form_instance({Rational(1), Rational(-1)});
  Expr I = inst.invariants.front();
  std::vector<Expr> F{I, I * I};
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(verify_perturbation_symmetries(inst.ds, inst.alg, F, k));
}
BENCHMARK(BM_NormalFormPerturbation)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

static void BM_AcceptanceCriterion(benchmark::State& state) {
  const auto& c = acceptance_criteria()[static_cast<std::size_t>(state.range(0))];
  state.SetLabel(c.name);
  for (auto _ : state) benchmark::DoNotOptimize(run_property(c, SelftestContext{}));
}
BENCHMARK(BM_AcceptanceCriterion)->DenseRange(0, 9)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
