#include "jetsym/parser.hpp"

#include <cctype>

#include "jetsym/error.hpp"

namespace jetsym {

std::optional<SymbolId> SymbolTable::resolve(std::string_view name) const {
  if (declared(name)) return intern(name);
  if (shorthand_) return shorthand_(name);
  return std::nullopt;
}

std::optional<SymbolId> SymbolTable::resolve_diff(std::string_view dependent,
                                                  const DerivativeSpec& spec) const {
  if (diff_) return diff_(dependent, spec);
  return std::nullopt;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const SymbolTable& table) : text_(text), table_(table) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, Errc code = Errc::syntax) const {
    throw ParseError(code, msg + " at position " + std::to_string(pos_ + 1), pos_);
  }

  [[noreturn]] void fail_at(std::size_t at, const std::string& msg, Errc code) const {
    throw ParseError(code, msg + " at position " + std::to_string(at + 1), at);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr rhs = unary();
        if (rhs.is_zero()) fail_at(at, "division by zero", Errc::syntax);
        try {
          lhs = lhs / rhs;
        } catch (const Error& e) {
          fail_at(at, e.what(), Errc::syntax);
        }
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return factor();
  }

  Expr factor() {
    Expr b = base();
    if (accept('^')) {
      std::size_t at = pos_;
      bool negative = false;
      while (true) {
        if (accept('-')) {
          negative = !negative;
        } else if (!accept('+')) {
          break;
        }
      }
      Expr e = base();
      if (!e.is_constant()) fail_at(at, "exponent must be a rational constant", Errc::syntax);
      Rational r = negative ? -e.value() : e.value();
      try {
        return pow(b, r);
      } catch (const Error& err) {
        fail_at(at, err.what(), Errc::syntax);
      }
    }
    return b;
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    if (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  int natural() {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a natural number");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }

  Expr base() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      fail("unexpected '" + std::string(1, c) + "'");
    }
    std::size_t at = pos_;
    std::string name = ident();
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      if (name == "diff") return diff(at);
      static const std::pair<const char*, Func> funcs[] = {
          {"exp", Func::exp}, {"log", Func::log}, {"sin", Func::sin},
          {"cos", Func::cos}, {"tan", Func::tan}, {"sqrt", Func::sqrt}};
      for (const auto& [fname, f] : funcs) {
        if (name == fname) {
          Expr arg = expr();
          expect(')');
          try {
            return Expr::apply(f, arg);
          } catch (const Error& err) {
            fail_at(at, err.what(), Errc::syntax);
          }
        }
      }
      fail_at(at, "unknown function '" + name + "'", Errc::unknown_function);
    }
    auto id = table_.resolve(name);
    if (!id) fail_at(at, "unknown symbol '" + name + "'", Errc::unknown_symbol);
    return Expr::symbol(*id);
  }

  Expr diff(std::size_t at) {
    std::string dep = ident();
    if (dep.empty()) fail("expected a dependent variable");
    SymbolTable::DerivativeSpec spec;
    while (accept(',')) {
      std::string var = ident();
      if (var.empty()) fail("expected an independent variable");
      expect(',');
      spec.emplace_back(var, natural());
    }
    if (spec.empty()) fail("diff needs at least one (variable, order) pair");
    expect(')');
    auto id = table_.resolve_diff(dep, spec);
    if (!id) fail_at(at, "cannot resolve derivative of '" + dep + "'", Errc::unknown_symbol);
    return Expr::symbol(*id);
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    auto r = Rational::from_string(std::string(text_.substr(start, pos_ - start)));
    if (!r) fail_at(start, "malformed number", Errc::syntax);
    return Expr(*r);
  }

  std::string_view text_;
  const SymbolTable& table_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const SymbolTable& table) { return Parser(text, table).run(); }

}  // namespace jetsym
