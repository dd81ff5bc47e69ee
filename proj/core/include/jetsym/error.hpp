#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jetsym {

enum class Errc {
  syntax,
  unknown_symbol,
  unknown_function,
  domain,
  persistent_domain_failure,
  order_overflow,
  invalid_twist,
  mch_violation,
  size_mismatch,
  non_vertical_input,
  singular_at_sample,
  needs_unavailable_derivative,
  degenerate_distribution,
  degenerate_base,
  ibdp_violation,
  non_generic_chain,
  not_expressible,
  degenerate_lagrangian,
  precondition_failure,
  invalid_argument,
  empty_ansatz,
  ill_conditioned,
  overflow,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Syntax errors carry the 0-based character offset into the source text.
class ParseError : public Error {
 public:
  ParseError(Errc code, const std::string& what, std::size_t position)
      : Error(code, what), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace jetsym
