#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dwallet/clock.hpp"
#include "dwallet/ids.hpp"
#include "dwallet/money.hpp"

namespace dwallet {

enum class WalletType { RealMoney, EmergencyFunds, Investment };
inline constexpr WalletType kAllWalletTypes[] = {WalletType::RealMoney, WalletType::EmergencyFunds,
                                                 WalletType::Investment};

enum class TransactionType { Deposit, Withdrawal, Transfer, Hold, TransferFromHold };
inline constexpr TransactionType kAllTransactionTypes[] = {
    TransactionType::Deposit, TransactionType::Withdrawal, TransactionType::Transfer,
    TransactionType::Hold, TransactionType::TransferFromHold};

enum class TransactionStatus { Processing, Failed, TransientError, Completed };

/// Internal is the external-bank side of a movement; Available and Holding
/// are the spendable and reserved balances of a subwallet.
enum class BalanceType { Internal, Available, Holding };

std::string_view to_string(WalletType t);
std::string_view to_string(TransactionType t);
std::string_view to_string(TransactionStatus s);
std::string_view to_string(BalanceType b);
std::optional<WalletType> parse_wallet_type(std::string_view s);
std::optional<TransactionType> parse_transaction_type(std::string_view s);
std::optional<TransactionStatus> parse_transaction_status(std::string_view s);
std::optional<BalanceType> parse_balance_type(std::string_view s);

[[nodiscard]] constexpr bool is_terminal(TransactionStatus s) {
  return s == TransactionStatus::Failed || s == TransactionStatus::Completed;
}

struct Subwallet {
  SubwalletId id;
  WalletId wallet_id;
  std::string name;

  friend bool operator==(const Subwallet&, const Subwallet&) = default;
};

struct Wallet {
  WalletId id;
  CustomerId customer;
  WalletType wallet_type = WalletType::RealMoney;
  std::vector<Subwallet> subwallets;

  [[nodiscard]] const Subwallet* find_subwallet(const SubwalletId& id) const;
  /// The only subwallet of a RealMoney or EmergencyFunds wallet.
  [[nodiscard]] const Subwallet& primary_subwallet() const { return subwallets.front(); }

  friend bool operator==(const Wallet&, const Wallet&) = default;
};

/// Originator or beneficiary of a transaction.
class Party {
 public:
  struct External {
    std::optional<std::string> reference;
    friend bool operator==(const External&, const External&) = default;
  };
  struct WalletRef {
    WalletId wallet_id;
    SubwalletId subwallet_id;
    friend bool operator==(const WalletRef&, const WalletRef&) = default;
  };

  static Party external(std::optional<std::string> reference = std::nullopt) {
    return Party{External{std::move(reference)}};
  }
  static Party wallet(WalletId wallet, SubwalletId subwallet) {
    return Party{WalletRef{std::move(wallet), std::move(subwallet)}};
  }
  static Party of(const Wallet& w, const Subwallet& s) { return wallet(w.id, s.id); }

  [[nodiscard]] bool is_external() const { return std::holds_alternative<External>(value_); }
  [[nodiscard]] const WalletRef* wallet_ref() const { return std::get_if<WalletRef>(&value_); }
  [[nodiscard]] const External* external_account() const { return std::get_if<External>(&value_); }

  friend bool operator==(const Party&, const Party&) = default;

 private:
  explicit Party(std::variant<External, WalletRef> v) : value_(std::move(v)) {}
  std::variant<External, WalletRef> value_;
};

/// Events that drive the transaction status machine.
enum class TransactionEvent {
  ValidationFailed,
  ExecutionSucceeded,
  ExecutionFailedTransiently,
  RetriesExhausted,
};
std::string_view to_string(TransactionEvent e);
std::optional<TransactionEvent> parse_transaction_event(std::string_view s);

struct ErrorInfo {
  std::string code;
  std::string detail;
  friend bool operator==(const ErrorInfo&, const ErrorInfo&) = default;
};

struct Transaction {
  TransactionId id;
  TransactionType txn_type = TransactionType::Deposit;
  Money amount;
  Party originator = Party::external();
  Party beneficiary = Party::external();
  TransactionStatus status = TransactionStatus::Processing;
  int attempts = 0;
  std::optional<BatchId> batch_id;
  Timestamp created_at{};
  std::optional<ErrorInfo> last_error;
  /// Every status event applied so far, in order.
  std::vector<TransactionEvent> history;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Basis points per subwallet; 10000 bp = 100%.
inline constexpr int kFullAllocationBp = 10000;

struct InvestmentPolicy {
  CustomerId customer;
  std::map<SubwalletId, int> allocations;

  friend bool operator==(const InvestmentPolicy&, const InvestmentPolicy&) = default;
};

}  // namespace dwallet
