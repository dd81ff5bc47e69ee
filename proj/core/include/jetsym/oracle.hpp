#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jetsym/expr.hpp"

namespace jetsym {

inline constexpr std::uint64_t kDefaultSeed = 0x6a657473796dull;

struct OracleSettings {
  std::uint64_t seed = kDefaultSeed;
  int trials = 50;
  double tol = 1e-9;
};

// A sample point at which an identity failed.
struct Witness {
  std::map<std::string, double> point;
  double lhs = 0;
  double rhs = 0;
  std::size_t index = 0;  // which pair of the batch failed
};

struct Verdict {
  bool holds = true;
  // Largest |a-b| / (1 + max(|a|, |b|)) seen over all points and pairs.
  double max_residual = 0;
  std::size_t points = 0;
  std::optional<Witness> witness;

  explicit operator bool() const noexcept { return holds; }
};

// Draws coordinates uniformly from rationals p/q, q <= 64, in [-2, 2] with
// zero excluded.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double draw();
  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  std::mt19937_64 rng_;
};

using ExprPair = std::pair<Expr, Expr>;

// Probabilistic identity oracle. Every call reseeds from the settings, so a
// verdict depends only on (expressions, settings).
class Oracle {
 public:
  Oracle() = default;
  explicit Oracle(OracleSettings settings) : settings_(settings) {}

  const OracleSettings& settings() const noexcept { return settings_; }
  Oracle with_trials(int trials) const;
  Oracle with_tol(double tol) const;
  Oracle with_seed(std::uint64_t seed) const;

  Verdict equal(const Expr& a, const Expr& b) const;
  Verdict zero(const Expr& e) const;
  Verdict all_equal(std::span<const ExprPair> pairs) const;
  Verdict all_zero(std::span<const Expr> exprs) const;

  // Compares at caller-supplied points (e.g. points on a constraint locus).
  Verdict all_equal_at(std::span<const ExprPair> pairs, std::span<const EvalPoint> points) const;

  // `count` points at which every expression evaluates without singularity.
  std::vector<EvalPoint> sample_points(std::span<const Expr> exprs, int count) const;

 private:
  OracleSettings settings_;
};

// Convenience form of Oracle::equal.
bool equal_numeric(const Expr& a, const Expr& b, int trials = 50, double tol = 1e-9,
                   std::uint64_t seed = kDefaultSeed);

}  // namespace jetsym
