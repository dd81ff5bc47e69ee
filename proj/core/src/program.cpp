#include "jetsym/program.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace jetsym {

namespace {

// Values below this magnitude are treated as singular when inverted.
constexpr double kSingular = 1e-6;

}  // namespace

Program::Program(std::span<const Expr> exprs) {
  std::vector<SymbolId> ids;
  for (const auto& e : exprs) {
    auto f = e.free_symbols();
    ids.insert(ids.end(), f.begin(), f.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  inputs_ = ids;
  std::unordered_map<SymbolId, std::uint32_t> slot;
  for (std::uint32_t i = 0; i < ids.size(); ++i) slot[ids[i]] = i;

  std::unordered_map<const Node*, std::uint32_t> index;
  // Iterative post-order traversal so deep trees do not blow the stack.
  auto emit = [&](const Expr& root) -> std::uint32_t {
    std::vector<std::pair<Expr, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [e, expanded] = stack.back();
      stack.pop_back();
      if (index.count(e.node())) continue;
      if (!expanded) {
        stack.emplace_back(e, true);
        for (const auto& c : e.children()) {
          if (!index.count(c.node())) stack.emplace_back(c, false);
        }
        continue;
      }
      Instr ins{};
      switch (e.kind()) {
        case NodeKind::constant:
          ins.op = Op::constant;
          ins.value = static_cast<long double>(e.value().num()) / static_cast<long double>(e.value().den());
          break;
        case NodeKind::symbol:
          ins.op = Op::input;
          ins.a = slot.at(e.symbol_id());
          break;
        case NodeKind::sum:
        case NodeKind::product:
          ins.op = e.kind() == NodeKind::sum ? Op::sum : Op::product;
          ins.a = static_cast<std::uint32_t>(operands_.size());
          ins.n = static_cast<std::uint32_t>(e.children().size());
          for (const auto& c : e.children()) operands_.push_back(index.at(c.node()));
          break;
        case NodeKind::power:
          ins.op = Op::power;
          ins.a = index.at(e.children().front().node());
          ins.value = static_cast<long double>(e.exponent().num()) / static_cast<long double>(e.exponent().den());
          ins.exp_num = e.exponent().num();
          ins.exp_den = e.exponent().den();
          break;
        case NodeKind::apply:
          switch (e.func()) {
            case Func::exp: ins.op = Op::exp; break;
            case Func::log: ins.op = Op::log; break;
            case Func::sin: ins.op = Op::sin; break;
            case Func::cos: ins.op = Op::cos; break;
            case Func::tan: ins.op = Op::tan; break;
            case Func::sqrt: ins.op = Op::power; ins.value = 0.5; ins.exp_num = 1; ins.exp_den = 2; break;
          }
          ins.a = index.at(e.children().front().node());
          break;
      }
      index.emplace(e.node(), static_cast<std::uint32_t>(tape_.size()));
      tape_.push_back(ins);
    }
    return index.at(root.node());
  };
  for (const auto& e : exprs) outputs_.push_back(emit(e));
  scratch_.resize(tape_.size());
}

bool Program::run(std::span<const double> inputs, std::span<double> outputs) {
  long double* v = scratch_.data();
  for (std::size_t i = 0; i < tape_.size(); ++i) {
    const Instr& ins = tape_[i];
    long double r = 0;
    switch (ins.op) {
      case Op::constant: r = ins.value; break;
      case Op::input: r = inputs[ins.a]; break;
      case Op::sum:
        for (std::uint32_t k = 0; k < ins.n; ++k) r += v[operands_[ins.a + k]];
        break;
      case Op::product:
        r = 1;
        for (std::uint32_t k = 0; k < ins.n; ++k) r *= v[operands_[ins.a + k]];
        break;
      case Op::power: {
        long double b = v[ins.a];
        if (ins.exp_num < 0 && std::abs(b) < kSingular) return false;
        if (ins.exp_den == 1) {
          r = std::pow(b, ins.value);
        } else if (b >= 0) {
          r = std::pow(b, ins.value);
        } else if (ins.exp_den % 2 == 1) {
          // Real odd root of a negative base.
          r = std::pow(-b, ins.value);
          if (ins.exp_num % 2 != 0) r = -r;
        } else {
          return false;
        }
        break;
      }
      case Op::exp: r = std::exp(v[ins.a]); break;
      case Op::log:
        if (v[ins.a] < kSingular) return false;
        r = std::log(v[ins.a]);
        break;
      case Op::sin: r = std::sin(v[ins.a]); break;
      case Op::cos: r = std::cos(v[ins.a]); break;
      case Op::tan:
        if (std::abs(std::cos(v[ins.a])) < kSingular) return false;
        r = std::tan(v[ins.a]);
        break;
    }
    if (!std::isfinite(r)) return false;
    v[i] = r;
  }
  for (std::size_t k = 0; k < outputs_.size(); ++k) {
    outputs[k] = static_cast<double>(v[outputs_[k]]);
    if (!std::isfinite(outputs[k])) return false;
  }
  return true;
}

}  // namespace jetsym
