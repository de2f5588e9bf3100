#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace quadeval {

/// Exact non-negative-denominator rational over 64-bit integers, always
/// stored in lowest terms. Intermediate products use 128-bit arithmetic;
/// a result that does not fit back into 64 bits throws std::overflow_error.
class Fraction {
public:
  constexpr Fraction() = default;
  Fraction(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const;

  /// Decimal rendering of value * scale, rounded half away from zero,
  /// computed on integers so the result never depends on binary rounding.
  std::string to_fixed(int digits, std::int64_t scale = 1) const;

  friend Fraction operator+(const Fraction& a, const Fraction& b);
  friend Fraction operator-(const Fraction& a, const Fraction& b);
  friend Fraction operator*(const Fraction& a, const Fraction& b);
  friend Fraction operator/(const Fraction& a, const Fraction& b);

  friend bool operator==(const Fraction& a, const Fraction& b) = default;
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::string to_string(const Fraction& f);

}  // namespace quadeval
