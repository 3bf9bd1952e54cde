#pragma once

#include <map>
#include <string>
#include <vector>

#include "dwallet/domain.hpp"
#include "dwallet/outcome.hpp"

namespace dwallet {

enum class WalletStoreError { DuplicateCustomer, EmptyInvestmentOptions, EmptyCustomerId };
std::string_view to_string(WalletStoreError e);

struct CustomerWallets {
  Wallet real_money;
  Wallet emergency_funds;
  Wallet investment;
};

/// Registry of wallets and subwallets. Single writer.
class WalletStore {
 public:
  explicit WalletStore(IdSource& ids) : ids_(&ids) {}

  Outcome<WalletStoreError, CustomerWallets> create_customer_wallets(
      const CustomerId& customer, const std::vector<std::string>& investment_options);

  [[nodiscard]] const Wallet* find_wallet(const WalletId& id) const;
  [[nodiscard]] const Wallet* wallet_of(const CustomerId& customer, WalletType type) const;
  [[nodiscard]] const Wallet* owner_of(const SubwalletId& id) const;
  [[nodiscard]] bool has_customer(const CustomerId& customer) const;
  [[nodiscard]] std::vector<CustomerId> customers() const;
  [[nodiscard]] std::vector<const Wallet*> wallets_of(const CustomerId& customer) const;

  /// All wallets in creation order.
  [[nodiscard]] const std::vector<Wallet>& wallets() const { return wallets_; }

  /// Rebuilds the store from persisted wallets. Fails with a message when
  /// the wallets violate a structural invariant.
  Outcome<std::string, Unit> restore(std::vector<Wallet> wallets);

 private:
  void index(std::size_t pos);

  IdSource* ids_;
  std::vector<Wallet> wallets_;
  std::map<WalletId, std::size_t> by_id_;
  std::map<SubwalletId, std::size_t> by_subwallet_;
  std::map<CustomerId, std::map<WalletType, std::size_t>> by_customer_;
};

/// Why a policy was rejected.
struct PolicyError {
  enum class Kind { PolicySumInvalid, ForeignSubwallet, NegativeAllocation, UnknownCustomer };
  Kind kind;
  int actual_sum = 0;
  SubwalletId subwallet;

  friend bool operator==(const PolicyError&, const PolicyError&) = default;
};
std::string describe(const PolicyError& e);

/// A policy is valid when its basis points are non-negative, sum to
/// exactly 10000, and every key is a subwallet of the customer's Investment
/// wallet.
Outcome<PolicyError, Unit> validate_policy(const InvestmentPolicy& policy, const WalletStore& wallets);

}  // namespace dwallet
