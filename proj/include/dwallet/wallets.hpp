#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dwallet/domain.hpp"
#include "dwallet/investments.hpp"
#include "dwallet/ledger.hpp"
#include "dwallet/transactions.hpp"
#include "dwallet/wallet_store.hpp"

namespace dwallet {

enum class RequestType { Deposit, Withdraw, EmergencyAllocation, EmergencyRelease, Investment, Liquidation };
inline constexpr RequestType kAllRequestTypes[] = {RequestType::Deposit,          RequestType::Withdraw,
                                                   RequestType::EmergencyAllocation, RequestType::EmergencyRelease,
                                                   RequestType::Investment,       RequestType::Liquidation};
std::string_view to_string(RequestType k);

struct WalletRequest {
  RequestType kind = RequestType::Deposit;
  CustomerId customer;
  Money amount;
};

struct WalletError {
  enum class Kind { UnknownCustomer, Investment };
  Kind kind;
  std::optional<InvestError> investment;
};
std::string describe(const WalletError& e);

/// What a request produced: either a processed transaction, or an
/// investment-service outcome.
struct RequestReceipt {
  std::optional<Transaction> transaction;
  std::optional<PendingRequest> pending;
};

struct SubwalletBalance {
  SubwalletId id;
  std::string name;
  Money available;
  Money holding;
};

struct WalletBalance {
  WalletId id;
  WalletType wallet_type;
  Money available;
  Money holding;
  std::vector<SubwalletBalance> subwallets;
};

struct CustomerSummary {
  CustomerId customer;
  std::vector<WalletBalance> wallets;  // RealMoney, EmergencyFunds, Investment

  [[nodiscard]] const WalletBalance& of(WalletType t) const;
  /// available + holding over every wallet.
  [[nodiscard]] Money total() const;
};

/// Wallet service: turns customer money movements into transactions.
class WalletService {
 public:
  WalletService(const WalletStore& wallets, const Ledger& ledger, TransactionEngine& engine,
                InvestmentService& investments, RetryPolicy retry_policy);

  /// External -> RealMoney.
  Outcome<WalletError, Transaction> deposit(const CustomerId& customer, Money amount);
  /// RealMoney -> External.
  Outcome<WalletError, Transaction> withdraw(const CustomerId& customer, Money amount);
  /// RealMoney -> EmergencyFunds, instant.
  Outcome<WalletError, Transaction> emergency_allocate(const CustomerId& customer, Money amount);
  /// EmergencyFunds -> RealMoney, instant.
  Outcome<WalletError, Transaction> emergency_release(const CustomerId& customer, Money amount);

  Outcome<WalletError, RequestReceipt> submit(const WalletRequest& request);

  Outcome<WalletError, CustomerSummary> summary(const CustomerId& customer) const;

  void set_retry_policy(RetryPolicy p) { retry_policy_ = p; }

 private:
  /// from/to of nullopt mean the external bank account.
  Outcome<WalletError, Transaction> move(const CustomerId& customer, TransactionType type, Money amount,
                                         std::optional<WalletType> from, std::optional<WalletType> to);

  const WalletStore* wallets_;
  const Ledger* ledger_;
  TransactionEngine* engine_;
  InvestmentService* investments_;
  RetryPolicy retry_policy_;
};

}  // namespace dwallet
