#include "dwallet/domain.hpp"

#include <algorithm>

#include "name_table.hpp"

namespace dwallet {

namespace {

using detail::NameTable;
using detail::name_of;
using detail::value_of;

constexpr NameTable<WalletType, 3> kWalletTypes{{
    {WalletType::RealMoney, "REAL_MONEY"},
    {WalletType::EmergencyFunds, "EMERGENCY_FUNDS"},
    {WalletType::Investment, "INVESTMENT"},
}};

constexpr NameTable<TransactionType, 5> kTransactionTypes{{
    {TransactionType::Deposit, "DEPOSIT"},
    {TransactionType::Withdrawal, "WITHDRAWAL"},
    {TransactionType::Transfer, "TRANSFER"},
    {TransactionType::Hold, "HOLD"},
    {TransactionType::TransferFromHold, "TRANSFER_FROM_HOLD"},
}};

constexpr NameTable<TransactionStatus, 4> kStatuses{{
    {TransactionStatus::Processing, "PROCESSING"},
    {TransactionStatus::Failed, "FAILED"},
    {TransactionStatus::TransientError, "TRANSIENT_ERROR"},
    {TransactionStatus::Completed, "COMPLETED"},
}};

constexpr NameTable<BalanceType, 3> kBalanceTypes{{
    {BalanceType::Internal, "INTERNAL"},
    {BalanceType::Available, "AVAILABLE"},
    {BalanceType::Holding, "HOLDING"},
}};

constexpr NameTable<TransactionEvent, 4> kEvents{{
    {TransactionEvent::ValidationFailed, "VALIDATION_FAILED"},
    {TransactionEvent::ExecutionSucceeded, "EXECUTION_SUCCEEDED"},
    {TransactionEvent::ExecutionFailedTransiently, "EXECUTION_FAILED_TRANSIENTLY"},
    {TransactionEvent::RetriesExhausted, "RETRIES_EXHAUSTED"},
}};

}  // namespace

std::string_view to_string(WalletType t) { return name_of(kWalletTypes, t); }
std::string_view to_string(TransactionType t) { return name_of(kTransactionTypes, t); }
std::string_view to_string(TransactionStatus s) { return name_of(kStatuses, s); }
std::string_view to_string(BalanceType b) { return name_of(kBalanceTypes, b); }
std::string_view to_string(TransactionEvent e) { return name_of(kEvents, e); }

std::optional<WalletType> parse_wallet_type(std::string_view s) { return value_of(kWalletTypes, s); }
std::optional<TransactionType> parse_transaction_type(std::string_view s) { return value_of(kTransactionTypes, s); }
std::optional<TransactionStatus> parse_transaction_status(std::string_view s) { return value_of(kStatuses, s); }
std::optional<BalanceType> parse_balance_type(std::string_view s) { return value_of(kBalanceTypes, s); }
std::optional<TransactionEvent> parse_transaction_event(std::string_view s) { return value_of(kEvents, s); }

const Subwallet* Wallet::find_subwallet(const SubwalletId& id) const {
  const auto it = std::find_if(subwallets.begin(), subwallets.end(), [&](const Subwallet& s) { return s.id == id; });
  return it == subwallets.end() ? nullptr : &*it;
}

}  // namespace dwallet
