#include "jetsym/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "jetsym/error.hpp"
#include "jetsym/program.hpp"

namespace jetsym {

namespace {

constexpr int kMaxAttemptsPerPoint = 100;
constexpr double kMaxFailureRate = 0.9;

double scaled_residual(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

bool negative_term(const Expr& t) {
  if (t.is_constant()) return t.value() < Rational(0);
  if (t.kind() != NodeKind::product) return false;
  for (const auto& c : t.children())
    if (c.is_constant()) return c.value() < Rational(0);
  return false;
}

// A zero test on a sum loses the size of its terms once they cancel, so
// e == 0 is compared as (terms with positive sign) == -(negative ones).
ExprPair sides(const ExprPair& p) {
  if (!p.second.is_zero() || p.first.kind() != NodeKind::sum) return p;
  std::vector<Expr> pos, neg;
  for (const auto& t : p.first.children()) {
    if (negative_term(t)) neg.push_back(-t);
    else pos.push_back(t);
  }
  if (pos.empty() || neg.empty()) return p;
  return {Expr::sum(std::move(pos)), Expr::sum(std::move(neg))};
}

std::vector<Expr> flatten(std::span<const ExprPair> pairs) {
  std::vector<Expr> flat;
  flat.reserve(pairs.size() * 2);
  for (const auto& pr : pairs) {
    auto [a, b] = sides(pr);
    flat.push_back(std::move(a));
    flat.push_back(std::move(b));
  }
  return flat;
}

}  // namespace

double Sampler::draw() {
  std::uniform_int_distribution<int> den_dist(1, 64);
  int den = den_dist(rng_);
  std::uniform_int_distribution<int> num_dist(-2 * den, 2 * den - 1);
  int num = num_dist(rng_);
  if (num >= 0) ++num;  // skip zero
  return static_cast<double>(num) / den;
}

Oracle Oracle::with_trials(int trials) const {
  auto s = settings_;
  s.trials = trials;
  return Oracle(s);
}

Oracle Oracle::with_tol(double tol) const {
  auto s = settings_;
  s.tol = tol;
  return Oracle(s);
}

Oracle Oracle::with_seed(std::uint64_t seed) const {
  auto s = settings_;
  s.seed = seed;
  return Oracle(s);
}

Verdict Oracle::equal(const Expr& a, const Expr& b) const {
  ExprPair p{a, b};
  return all_equal(std::span<const ExprPair>(&p, 1));
}

Verdict Oracle::zero(const Expr& e) const { return equal(e, Expr()); }

Verdict Oracle::all_zero(std::span<const Expr> exprs) const {
  std::vector<ExprPair> pairs;
  pairs.reserve(exprs.size());
  for (const auto& e : exprs) pairs.emplace_back(e, Expr());
  return all_equal(pairs);
}

Verdict Oracle::all_equal(std::span<const ExprPair> pairs) const {
  if (settings_.trials < 1) throw Error(Errc::invalid_argument, "oracle trials must be >= 1");
  Verdict verdict;
  if (pairs.empty()) return verdict;
  std::vector<Expr> flat = flatten(pairs);
  Program program(flat);
  const auto& inputs = program.inputs();
  std::vector<double> in(inputs.size());
  std::vector<double> out(flat.size());
  Sampler sampler(settings_.seed);
  long attempts = 0;
  long failures = 0;
  for (int t = 0; t < settings_.trials; ++t) {
    bool ok = false;
    for (int k = 0; k < kMaxAttemptsPerPoint && !ok; ++k) {
      for (auto& v : in) v = sampler.draw();
      ++attempts;
      ok = program.run(in, out);
      if (!ok) ++failures;
    }
    if (!ok) {
      throw Error(Errc::persistent_domain_failure,
                  "no nonsingular sample point found after " +
                      std::to_string(kMaxAttemptsPerPoint) + " attempts");
    }
    ++verdict.points;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      double r = scaled_residual(out[2 * i], out[2 * i + 1]);
      if (r > verdict.max_residual) verdict.max_residual = r;
      if (r > settings_.tol && verdict.holds) {
        verdict.holds = false;
        Witness w;
        for (std::size_t s = 0; s < inputs.size(); ++s) w.point[symbol_name(inputs[s])] = in[s];
        w.lhs = out[2 * i];
        w.rhs = out[2 * i + 1];
        w.index = i;
        verdict.witness = std::move(w);
      }
    }
  }
  if (attempts >= 10 && static_cast<double>(failures) > kMaxFailureRate * attempts) {
    throw Error(Errc::persistent_domain_failure,
                "more than 90% of sample points were singular");
  }
  return verdict;
}

Verdict Oracle::all_equal_at(std::span<const ExprPair> pairs,
                             std::span<const EvalPoint> points) const {
  Verdict verdict;
  std::vector<Expr> flat = flatten(pairs);
  Program program(flat);
  const auto& inputs = program.inputs();
  std::vector<double> in(inputs.size());
  std::vector<double> out(flat.size());
  for (const auto& p : points) {
    for (std::size_t s = 0; s < inputs.size(); ++s) in[s] = p.at(inputs[s]);
    if (!program.run(in, out)) continue;
    ++verdict.points;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      double r = scaled_residual(out[2 * i], out[2 * i + 1]);
      verdict.max_residual = std::max(verdict.max_residual, r);
      if (r > settings_.tol && verdict.holds) {
        verdict.holds = false;
        Witness w;
        for (std::size_t s = 0; s < inputs.size(); ++s) w.point[symbol_name(inputs[s])] = in[s];
        w.lhs = out[2 * i];
        w.rhs = out[2 * i + 1];
        w.index = i;
        verdict.witness = std::move(w);
      }
    }
  }
  if (!points.empty() && verdict.points == 0) {
    throw Error(Errc::persistent_domain_failure, "every supplied point was singular");
  }
  return verdict;
}

std::vector<EvalPoint> Oracle::sample_points(std::span<const Expr> exprs, int count) const {
  Program program(exprs);
  const auto& inputs = program.inputs();
  std::vector<double> in(inputs.size());
  std::vector<double> out(program.output_count());
  Sampler sampler(settings_.seed);
  std::vector<EvalPoint> points;
  for (int t = 0; t < count; ++t) {
    bool ok = false;
    for (int k = 0; k < kMaxAttemptsPerPoint && !ok; ++k) {
      for (auto& v : in) v = sampler.draw();
      ok = program.run(in, out);
    }
    if (!ok) throw Error(Errc::persistent_domain_failure, "no nonsingular sample point found");
    EvalPoint p;
    for (std::size_t s = 0; s < inputs.size(); ++s) p.set(inputs[s], in[s]);
    points.push_back(std::move(p));
  }
  return points;
}

bool equal_numeric(const Expr& a, const Expr& b, int trials, double tol, std::uint64_t seed) {
  return Oracle({seed, trials, tol}).equal(a, b).holds;
}

}  // namespace jetsym
