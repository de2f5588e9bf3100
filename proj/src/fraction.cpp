#include "quadeval/fraction.hpp"

#include <limits>
#include <stdexcept>

namespace quadeval {

namespace {

using i128 = __int128;

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Fraction reduce(i128 num, i128 den) {
  if (den == 0) throw std::domain_error("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr i128 lo = std::numeric_limits<std::int64_t>::min();
  constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
  if (num < lo || num > hi || den > hi) throw std::overflow_error("fraction overflow");
  return Fraction(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("fraction with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  num_ = static_cast<std::int64_t>(num / g);
  den_ = static_cast<std::int64_t>(den / g);
}

double Fraction::to_double() const {
  return static_cast<double>(num_) / static_cast<double>(den_);
}

std::string Fraction::to_fixed(int digits, std::int64_t scale) const {
  i128 pow10 = 1;
  for (int i = 0; i < digits; ++i) pow10 *= 10;
  i128 n = static_cast<i128>(num_) * scale * pow10;
  bool negative = n < 0;
  n = abs128(n);
  i128 q = n / den_;
  i128 r = n % den_;
  if (2 * r >= den_) ++q;

  std::string out;
  i128 whole = q / pow10;
  i128 frac = q % pow10;
  if (whole == 0) {
    out = "0";
  } else {
    while (whole > 0) {
      out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(whole % 10)));
      whole /= 10;
    }
  }
  if (digits > 0) {
    std::string f(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
      f[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    out += '.';
    out += f;
  }
  if (negative && q != 0) out.insert(out.begin(), '-');
  return out;
}

Fraction operator+(const Fraction& a, const Fraction& b) {
  return reduce(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                static_cast<i128>(a.den_) * b.den_);
}

Fraction operator-(const Fraction& a, const Fraction& b) {
  return reduce(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
                static_cast<i128>(a.den_) * b.den_);
}

Fraction operator*(const Fraction& a, const Fraction& b) {
  return reduce(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}

Fraction operator/(const Fraction& a, const Fraction& b) {
  return reduce(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
  return static_cast<i128>(a.num_) * b.den_ <=> static_cast<i128>(b.num_) * a.den_;
}

std::string to_string(const Fraction& f) {
  return std::to_string(f.num()) + "/" + std::to_string(f.den());
}

}  // namespace quadeval
