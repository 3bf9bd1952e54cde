#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dwallet {

/// Amount of the single implicit currency, in minor units (cents).
///
/// All arithmetic is overflow-checked. The checked_* members report overflow
/// through an empty optional; the operators throw std::overflow_error.
class Money {
 public:
  constexpr Money() = default;
  constexpr explicit Money(std::int64_t minor_units) : minor_(minor_units) {}

  [[nodiscard]] constexpr std::int64_t minor_units() const { return minor_; }

  [[nodiscard]] constexpr bool is_positive() const { return minor_ > 0; }
  [[nodiscard]] constexpr bool is_zero() const { return minor_ == 0; }
  [[nodiscard]] constexpr bool is_negative() const { return minor_ < 0; }

  [[nodiscard]] std::optional<Money> checked_add(Money other) const {
    std::int64_t out = 0;
    if (__builtin_add_overflow(minor_, other.minor_, &out)) return std::nullopt;
    return Money{out};
  }
  [[nodiscard]] std::optional<Money> checked_sub(Money other) const {
    std::int64_t out = 0;
    if (__builtin_sub_overflow(minor_, other.minor_, &out)) return std::nullopt;
    return Money{out};
  }
  [[nodiscard]] std::optional<Money> checked_negate() const {
    return Money{0}.checked_sub(*this);
  }

  Money operator+(Money other) const { return require(checked_add(other)); }
  Money operator-(Money other) const { return require(checked_sub(other)); }
  Money operator-() const { return require(checked_negate()); }
  Money& operator+=(Money other) { return *this = *this + other; }
  Money& operator-=(Money other) { return *this = *this - other; }

  constexpr auto operator<=>(const Money&) const = default;

  /// "1234.05", "-0.50". Always two fraction digits.
  [[nodiscard]] std::string to_decimal_string() const;

  /// Parses a decimal string with at most two fraction digits ("100",
  /// "100.5", "-3.25") into minor units using integer arithmetic only.
  /// Returns nullopt on malformed input or overflow.
  static std::optional<Money> parse_decimal(const std::string& text);

 private:
  static Money require(std::optional<Money> m) {
    if (!m) throw std::overflow_error("money arithmetic overflow");
    return *m;
  }

  std::int64_t minor_ = 0;
};

}  // namespace dwallet
