#pragma once

#include <algorithm>
#include <optional>
#include <type_traits>
#include <utility>

namespace dwallet {

class RetryPolicy {
 public:
  static constexpr int kDefaultMaxAttempts = 3;

  RetryPolicy() = default;
  /// nullopt unless max_attempts >= 1.
  static std::optional<RetryPolicy> with_max_attempts(int max_attempts) {
    if (max_attempts < 1) return std::nullopt;
    RetryPolicy p;
    p.max_attempts_ = max_attempts;
    return p;
  }

  [[nodiscard]] int max_attempts() const { return max_attempts_; }

 private:
  int max_attempts_ = kDefaultMaxAttempts;
};

/// Calls op() up to policy.max_attempts() times. Returns the first success
/// as soon as it happens, otherwise the last failure. op must return an
/// Outcome-like type (ok() / error()). Attempts are immediate.
template <typename Op>
auto retry(Op&& op, const RetryPolicy& policy) -> std::invoke_result_t<Op&> {
  auto result = op();
  for (int attempt = 1; attempt < policy.max_attempts() && !result.ok(); ++attempt) {
    result = op();
  }
  return result;
}

}  // namespace dwallet
