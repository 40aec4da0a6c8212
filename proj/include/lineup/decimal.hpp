#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <string>
#include <string_view>

#include "lineup/error.hpp"

namespace lineup {

/// Exact fixed-point decimal with two fractional digits, stored as an
/// integer count of hundredths. Ratings, penalty weights and every BQM
/// coefficient live in this type so that energies compare exactly.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 100;

  constexpr Decimal() = default;

  static constexpr Decimal from_hundredths(std::int64_t h) noexcept {
    Decimal d;
    d.hundredths_ = h;
    return d;
  }

  static constexpr Decimal from_integer(std::int64_t v) noexcept {
    return from_hundredths(v * kScale);
  }

  /// Parses `[-]digits[.d[d]]`. At most `max_fraction_digits` (<= 2) digits
  /// after the point; `min_fraction_digits` forces a point to be present.
  static Decimal parse(std::string_view text, int min_fraction_digits = 0,
                       int max_fraction_digits = 2) {
    auto fail = [&]() -> ParseError {
      return ParseError("malformed decimal '" + std::string(text) + "'");
    };
    std::string_view s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    const auto dot = s.find('.');
    const std::string_view int_part = s.substr(0, dot);
    const std::string_view frac_part =
        dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (int_part.empty()) throw fail();
    if (dot != std::string_view::npos && frac_part.empty()) throw fail();
    if (static_cast<int>(frac_part.size()) < min_fraction_digits ||
        static_cast<int>(frac_part.size()) > max_fraction_digits ||
        frac_part.size() > 2) {
      throw fail();
    }
    auto digits_only = [](std::string_view v) {
      for (char c : v)
        if (c < '0' || c > '9') return false;
      return true;
    };
    if (!digits_only(int_part) || !digits_only(frac_part)) throw fail();

    std::int64_t whole = 0;
    auto [p, ec] = std::from_chars(int_part.data(),
                                   int_part.data() + int_part.size(), whole);
    if (ec != std::errc{} || p != int_part.data() + int_part.size())
      throw fail();
    std::int64_t frac = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      frac = frac * 10 + (i < frac_part.size() ? frac_part[i] - '0' : 0);
    }
    const std::int64_t h = whole * kScale + frac;
    return from_hundredths(negative ? -h : h);
  }

  constexpr std::int64_t hundredths() const noexcept { return hundredths_; }
  constexpr bool is_integer() const noexcept {
    return hundredths_ % kScale == 0;
  }
  constexpr double to_double() const noexcept {
    return static_cast<double>(hundredths_) / kScale;
  }

  /// Always two fractional digits, e.g. "-82.67", "13575.00".
  std::string to_string() const {
    const std::int64_t mag = hundredths_ < 0 ? -hundredths_ : hundredths_;
    std::string out = hundredths_ < 0 ? "-" : "";
    out += std::to_string(mag / kScale);
    out += '.';
    const auto frac = mag % kScale;
    out += static_cast<char>('0' + frac / 10);
    out += static_cast<char>('0' + frac % 10);
    return out;
  }

  constexpr Decimal operator-() const noexcept {
    return from_hundredths(-hundredths_);
  }
  constexpr Decimal& operator+=(Decimal o) noexcept {
    hundredths_ += o.hundredths_;
    return *this;
  }
  constexpr Decimal& operator-=(Decimal o) noexcept {
    hundredths_ -= o.hundredths_;
    return *this;
  }
  friend constexpr Decimal operator+(Decimal a, Decimal b) noexcept {
    return a += b;
  }
  friend constexpr Decimal operator-(Decimal a, Decimal b) noexcept {
    return a -= b;
  }
  friend constexpr Decimal operator*(Decimal a, std::int64_t k) noexcept {
    return from_hundredths(a.hundredths_ * k);
  }
  friend constexpr Decimal operator*(std::int64_t k, Decimal a) noexcept {
    return a * k;
  }

  /// Product of two decimals; throws when the result needs more than two
  /// fractional digits.
  friend Decimal operator*(Decimal a, Decimal b) {
    const std::int64_t raw = a.hundredths_ * b.hundredths_;
    if (raw % kScale != 0) {
      throw InvalidArgument("inexact decimal product " + a.to_string() +
                            " * " + b.to_string());
    }
    return from_hundredths(raw / kScale);
  }

  friend constexpr auto operator<=>(Decimal, Decimal) = default;

  friend std::ostream& operator<<(std::ostream& os, Decimal d) {
    return os << d.to_string();
  }

 private:
  std::int64_t hundredths_ = 0;
};

namespace literals {
/// `6.81_dec` style literals for tests and constants.
consteval Decimal operator""_dec(long double v) {
  const long double scaled = v * Decimal::kScale;
  const auto rounded = static_cast<std::int64_t>(
      scaled < 0 ? scaled - 0.5L : scaled + 0.5L);
  return Decimal::from_hundredths(rounded);
}
consteval Decimal operator""_dec(unsigned long long v) {
  return Decimal::from_integer(static_cast<std::int64_t>(v));
}
}  // namespace literals

}  // namespace lineup
