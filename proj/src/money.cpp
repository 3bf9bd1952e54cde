#include "dwallet/money.hpp"

#include <cctype>
#include <cstdlib>

namespace dwallet {

std::string Money::to_decimal_string() const {
  // Work in unsigned space so INT64_MIN prints correctly.
  const bool negative = minor_ < 0;
  const std::uint64_t magnitude =
      negative ? ~static_cast<std::uint64_t>(minor_) + 1 : static_cast<std::uint64_t>(minor_);
  std::string out = negative ? "-" : "";
  out += std::to_string(magnitude / 100);
  out += '.';
  const auto cents = magnitude % 100;
  if (cents < 10) out += '0';
  out += std::to_string(cents);
  return out;
}

std::optional<Money> Money::parse_decimal(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
    negative = text[pos] == '-';
    ++pos;
  }
  const std::size_t int_start = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  const std::size_t int_end = pos;
  if (int_end == int_start) return std::nullopt;

  std::size_t frac_start = pos;
  std::size_t frac_end = pos;
  if (pos < text.size() && text[pos] == '.') {
    frac_start = ++pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    frac_end = pos;
    const auto digits = frac_end - frac_start;
    if (digits == 0 || digits > 2) return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;

  std::int64_t value = 0;
  auto push_digit = [&value, negative](char c) {
    const int d = c - '0';
    if (__builtin_mul_overflow(value, 10, &value)) return false;
    return !(negative ? __builtin_sub_overflow(value, d, &value) : __builtin_add_overflow(value, d, &value));
  };
  for (std::size_t i = int_start; i < int_end; ++i) {
    if (!push_digit(text[i])) return std::nullopt;
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const std::size_t at = frac_start + i;
    if (!push_digit(at < frac_end ? text[at] : '0')) return std::nullopt;
  }
  return Money{value};
}

}  // namespace dwallet
