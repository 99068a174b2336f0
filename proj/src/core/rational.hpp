#ifndef BBR_RATIONAL_HPP
#define BBR_RATIONAL_HPP

#include <cstdint>
#include <numeric>
#include <string>

#include "errors.hpp"

namespace bbr {

/// Exact rational for error-rate arithmetic. Counts from real studies stay
/// far below the int64 range, so no overflow guarding beyond normalization
/// is needed.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw Error(ErrorCode::Domain, "rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.num * b.den <= b.num * a.den;
  }

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

}  // namespace bbr

#endif  // BBR_RATIONAL_HPP
