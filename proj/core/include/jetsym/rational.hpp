#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace jetsym {

// Exact rational with 64-bit numerator/denominator. Arithmetic that would
// overflow throws Error(Errc::overflow) instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  bool is_zero() const noexcept { return num_ == 0; }
  bool is_one() const noexcept { return num_ == 1 && den_ == 1; }
  bool is_integer() const noexcept { return den_ == 1; }
  bool is_negative() const noexcept { return num_ < 0; }
  int sign() const noexcept { return (num_ > 0) - (num_ < 0); }

  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  Rational operator-() const;
  Rational abs() const { return num_ < 0 ? -*this : *this; }
  Rational reciprocal() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  // Integer power; negative exponents invert.
  Rational pow(std::int64_t e) const;

  // Exact root if this is a perfect q-th power (q > 0), else nullopt.
  std::optional<Rational> root(std::int64_t q) const;

  // Parses "3", "-3/4", "0.125", "1e-3".
  static std::optional<Rational> from_string(const std::string& text);

  // Nearest rational with denominator <= max_den if within tol of value.
  static std::optional<Rational> approximate(double value, std::int64_t max_den,
                                             double tol);

  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace jetsym
