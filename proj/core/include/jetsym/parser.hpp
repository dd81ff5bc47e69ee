#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jetsym/expr.hpp"

namespace jetsym {

// Names an expression may refer to. Plain names are declared explicitly; jet
// shorthand (`u_xy`) and `diff(u,x,2)` go through an optional resolver that
// the jet space installs.
class SymbolTable {
 public:
  using DerivativeSpec = std::vector<std::pair<std::string, int>>;
  using ShorthandResolver = std::function<std::optional<SymbolId>(std::string_view)>;
  using DiffResolver =
      std::function<std::optional<SymbolId>(std::string_view, const DerivativeSpec&)>;

  void declare(std::string_view name) { names_.emplace(name); }
  bool declared(std::string_view name) const { return names_.count(std::string(name)) > 0; }

  void set_resolvers(ShorthandResolver shorthand, DiffResolver diff) {
    shorthand_ = std::move(shorthand);
    diff_ = std::move(diff);
  }

  std::optional<SymbolId> resolve(std::string_view name) const;
  std::optional<SymbolId> resolve_diff(std::string_view dependent,
                                       const DerivativeSpec& spec) const;

 private:
  std::set<std::string, std::less<>> names_;
  ShorthandResolver shorthand_;
  DiffResolver diff_;
};

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := ('-'|'+') unary | factor
//   factor := base ('^' exponent)?
//   base   := number | ident | func '(' expr ')'
//           | 'diff' '(' ident (',' ident ',' nat)+ ')' | '(' expr ')'
// The exponent must reduce to a rational constant.
// Throws ParseError (syntax, unknown_symbol, unknown_function).
Expr parse(std::string_view text, const SymbolTable& table);

}  // namespace jetsym
