#include "jetsym/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "jetsym/error.hpp"

namespace jetsym {

namespace {

using Wide = __int128;

constexpr Wide kMax = std::numeric_limits<std::int64_t>::max();

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make(Wide num, Wide den) {
  if (den == 0) throw Error(Errc::domain, "rational division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num > kMax || num < -kMax || den > kMax) {
    throw Error(Errc::overflow, "rational arithmetic overflow");
  }
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(Errc::domain, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

Rational Rational::operator-() const { return make(-Wide(num_), den_); }

Rational Rational::reciprocal() const { return make(den_, num_); }

Rational operator+(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_, Wide(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = Wide(a.num_) * b.den_;
  Wide rhs = Wide(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational Rational::pow(std::int64_t e) const {
  if (e < 0) return reciprocal().pow(-e);
  Rational result(1);
  Rational base = *this;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e > 0) base *= base;
  }
  return result;
}

namespace {

std::optional<std::int64_t> integer_root(std::int64_t v, std::int64_t q) {
  if (v < 0) return std::nullopt;
  if (v == 0 || v == 1) return v;
  auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / q)));
  for (std::int64_t c = std::max<std::int64_t>(0, guess - 1); c <= guess + 1; ++c) {
    Wide p = 1;
    bool over = false;
    for (std::int64_t i = 0; i < q; ++i) {
      p *= c;
      if (p > kMax) {
        over = true;
        break;
      }
    }
    if (!over && p == v) return c;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Rational> Rational::root(std::int64_t q) const {
  if (q <= 0) return std::nullopt;
  if (q == 1) return *this;
  bool negative = num_ < 0;
  if (negative && q % 2 == 0) return std::nullopt;
  auto n = integer_root(negative ? -num_ : num_, q);
  auto d = integer_root(den_, q);
  if (!n || !d) return std::nullopt;
  return Rational(negative ? -*n : *n, *d);
}

std::optional<Rational> Rational::from_string(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      auto a = from_string(text.substr(0, slash));
      auto b = from_string(text.substr(slash + 1));
      if (!a || !b || b->is_zero()) return std::nullopt;
      return *a / *b;
    }
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
      negative = text[i] == '-';
      ++i;
    }
    Rational value(0);
    bool digits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      value = value * 10 + Rational(text[i] - '0');
      digits = true;
      ++i;
    }
    if (i < text.size() && text[i] == '.') {
      ++i;
      Rational scale(1, 10);
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        value += scale * Rational(text[i] - '0');
        scale /= 10;
        digits = true;
        ++i;
      }
    }
    if (!digits) return std::nullopt;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
      ++i;
      bool eneg = false;
      if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        eneg = text[i] == '-';
        ++i;
      }
      std::int64_t e = 0;
      bool edigits = false;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        e = e * 10 + (text[i] - '0');
        edigits = true;
        if (e > 18) return std::nullopt;
        ++i;
      }
      if (!edigits) return std::nullopt;
      value *= Rational(10).pow(eneg ? -e : e);
    }
    if (i != text.size()) return std::nullopt;
    return negative ? -value : value;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<Rational> Rational::approximate(double value, std::int64_t max_den,
                                              double tol) {
  if (!std::isfinite(value)) return std::nullopt;
  for (std::int64_t d = 1; d <= max_den; ++d) {
    double scaled = value * static_cast<double>(d);
    if (std::abs(scaled) > 1e15) return std::nullopt;
    double n = std::round(scaled);
    if (std::abs(n / static_cast<double>(d) - value) <= tol) {
      return Rational(static_cast<std::int64_t>(n), d);
    }
  }
  return std::nullopt;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::syntax: return "syntax-error";
    case Errc::unknown_symbol: return "unknown-symbol";
    case Errc::unknown_function: return "unknown-function";
    case Errc::domain: return "domain-error";
    case Errc::persistent_domain_failure: return "persistent-domain-failure";
    case Errc::order_overflow: return "order-overflow";
    case Errc::invalid_twist: return "invalid-twist";
    case Errc::mch_violation: return "mch-violation";
    case Errc::size_mismatch: return "size-mismatch";
    case Errc::non_vertical_input: return "non-vertical-input";
    case Errc::singular_at_sample: return "singular-at-sample";
    case Errc::needs_unavailable_derivative: return "needs-unavailable-derivative";
    case Errc::degenerate_distribution: return "degenerate-distribution";
    case Errc::degenerate_base: return "degenerate-base";
    case Errc::ibdp_violation: return "ibdp-violation";
    case Errc::non_generic_chain: return "non-generic-chain";
    case Errc::not_expressible: return "not-expressible";
    case Errc::degenerate_lagrangian: return "degenerate-lagrangian";
    case Errc::precondition_failure: return "precondition-failure";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::empty_ansatz: return "empty-ansatz";
    case Errc::ill_conditioned: return "ill-conditioned";
    case Errc::overflow: return "overflow";
  }
  return "unknown";
}

}  // namespace jetsym
