#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jetsym/expr.hpp"

namespace jetsym {

// A batch of expressions flattened into an instruction tape. Shared
// subexpressions are evaluated once per run.
class Program {
 public:
  explicit Program(std::span<const Expr> exprs);

  // Free symbols of all compiled expressions, sorted by id; `run` expects
  // input values in this order.
  const std::vector<SymbolId>& inputs() const noexcept { return inputs_; }
  std::size_t output_count() const noexcept { return outputs_.size(); }

  // False when any instruction is singular (log of a nonpositive value,
  // division by a near-zero value, non-finite result).
  bool run(std::span<const double> inputs, std::span<double> outputs);

 private:
  enum class Op : std::uint8_t { constant, input, sum, product, power, exp, log, sin, cos, tan };
  struct Instr {
    Op op;
    std::uint32_t a = 0;  // input slot, operand index, or operand-list start
    std::uint32_t n = 0;  // operand-list length
    long double value = 0;  // constant or exponent
    std::int64_t exp_num = 0;
    std::int64_t exp_den = 1;
  };

  std::vector<Instr> tape_;
  std::vector<std::uint32_t> operands_;
  std::vector<std::uint32_t> outputs_;
  std::vector<SymbolId> inputs_;
  std::vector<long double> scratch_;  // extended precision against cancellation
};

}  // namespace jetsym
