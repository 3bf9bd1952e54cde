#pragma once

#include <cassert>
#include <type_traits>
#include <utility>
#include <variant>

namespace dwallet {

/// Either a failure of type E or a success of type T. Fallible engine
/// operations return this instead of throwing.
template <typename E, typename T>
class Outcome {
 public:
  using error_type = E;
  using value_type = T;

  static Outcome success(T value) {
    return Outcome(std::in_place_index<1>, std::move(value));
  }
  static Outcome failure(E error) {
    return Outcome(std::in_place_index<0>, std::move(error));
  }

  [[nodiscard]] bool ok() const { return state_.index() == 1; }
  explicit operator bool() const { return ok(); }

  [[nodiscard]] const T& value() const& {
    assert(ok());
    return std::get<1>(state_);
  }
  [[nodiscard]] T& value() & {
    assert(ok());
    return std::get<1>(state_);
  }
  [[nodiscard]] T&& value() && {
    assert(ok());
    return std::get<1>(std::move(state_));
  }
  [[nodiscard]] const E& error() const& {
    assert(!ok());
    return std::get<0>(state_);
  }

  const T* operator->() const { return &value(); }
  const T& operator*() const& { return value(); }

  /// Applies f to the success value; failures pass through unchanged.
  template <typename F>
  auto map(F&& f) const -> Outcome<E, std::invoke_result_t<F, const T&>> {
    using U = std::invoke_result_t<F, const T&>;
    if (!ok()) return Outcome<E, U>::failure(error());
    return Outcome<E, U>::success(std::forward<F>(f)(value()));
  }

 private:
  template <std::size_t I, typename A>
  Outcome(std::in_place_index_t<I> tag, A&& arg) : state_(tag, std::forward<A>(arg)) {}

  std::variant<E, T> state_;
};

/// Placeholder success payload for operations with nothing to return.
struct Unit {
  friend bool operator==(Unit, Unit) { return true; }
};

}  // namespace dwallet
