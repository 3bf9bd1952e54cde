#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dwallet {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

/// Source of "now". Injected everywhere so runs are reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual Timestamp now() const = 0;
  [[nodiscard]] Date today() const {
    return Date{std::chrono::floor<std::chrono::days>(now())};
  }
};

/// Logical clock that only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(Timestamp start) : now_(start) {}

  [[nodiscard]] Timestamp now() const override { return now_; }
  void set(Timestamp t) { now_ = t; }
  void advance(std::chrono::seconds by) { now_ += by; }

 private:
  Timestamp now_;
};

/// Default logical start: 2025-01-01T00:00:00Z.
Timestamp default_epoch();

std::string format_timestamp(Timestamp t);  // 2025-01-03T00:00:00Z
std::string format_date(Date d);            // 2025-01-03
std::optional<Date> parse_date(std::string_view text);
/// Accepts "YYYY-MM-DD" (midnight) or "YYYY-MM-DDTHH:MM:SSZ".
std::optional<Timestamp> parse_timestamp(std::string_view text);

}  // namespace dwallet
