#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace dwallet {

/// Opaque string identifier, distinct per Tag so ids of different entities
/// cannot be mixed up.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {}

  [[nodiscard]] const std::string& str() const { return value_; }
  [[nodiscard]] bool empty() const { return value_.empty(); }

  auto operator<=>(const StrongId&) const = default;

 private:
  std::string value_;
};

using CustomerId = StrongId<struct CustomerIdTag>;
using WalletId = StrongId<struct WalletIdTag>;
using SubwalletId = StrongId<struct SubwalletIdTag>;
using TransactionId = StrongId<struct TransactionIdTag>;
using BatchId = StrongId<struct BatchIdTag>;
using EntryId = StrongId<struct EntryIdTag>;
using RequestId = StrongId<struct RequestIdTag>;

/// Deterministic id generator: "<prefix>-<counter>", one counter per prefix.
/// Counters are part of persisted state so ids stay unique across runs.
class IdSource {
 public:
  std::string next(const std::string& prefix);

  [[nodiscard]] const std::map<std::string, std::uint64_t>& counters() const { return counters_; }
  void restore(std::map<std::string, std::uint64_t> counters) { counters_ = std::move(counters); }

 private:
  std::map<std::string, std::uint64_t> counters_;
};

}  // namespace dwallet

template <typename Tag>
struct std::hash<dwallet::StrongId<Tag>> {
  std::size_t operator()(const dwallet::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
