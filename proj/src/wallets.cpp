#include "dwallet/wallets.hpp"

#include <cassert>

namespace dwallet {

std::string_view to_string(RequestType k) {
  switch (k) {
    case RequestType::Deposit:
      return "DEPOSIT";
    case RequestType::Withdraw:
      return "WITHDRAW";
    case RequestType::EmergencyAllocation:
      return "EMERGENCY_ALLOCATION";
    case RequestType::EmergencyRelease:
      return "EMERGENCY_RELEASE";
    case RequestType::Investment:
      return "INVESTMENT";
    case RequestType::Liquidation:
      return "LIQUIDATION";
  }
  return "UNKNOWN";
}

std::string describe(const WalletError& e) {
  if (e.kind == WalletError::Kind::UnknownCustomer) return "UnknownCustomer";
  return e.investment ? describe(*e.investment) : "InvestmentError";
}

const WalletBalance& CustomerSummary::of(WalletType t) const {
  for (const auto& w : wallets) {
    if (w.wallet_type == t) return w;
  }
  assert(false && "summary lacks a wallet type");
  return wallets.front();
}

Money CustomerSummary::total() const {
  Money sum;
  for (const auto& w : wallets) sum += w.available + w.holding;
  return sum;
}

WalletService::WalletService(const WalletStore& wallets, const Ledger& ledger, TransactionEngine& engine,
                             InvestmentService& investments, RetryPolicy retry_policy)
    : wallets_(&wallets), ledger_(&ledger), engine_(&engine), investments_(&investments), retry_policy_(retry_policy) {}

Outcome<WalletError, Transaction> WalletService::move(const CustomerId& customer, TransactionType type, Money amount,
                                                      std::optional<WalletType> from, std::optional<WalletType> to) {
  using Result = Outcome<WalletError, Transaction>;
  if (!wallets_->has_customer(customer)) return Result::failure({WalletError::Kind::UnknownCustomer, {}});
  auto party = [&](std::optional<WalletType> t) {
    if (!t) return Party::external();
    const Wallet* w = wallets_->wallet_of(customer, *t);
    return Party::of(*w, w->primary_subwallet());
  };
  const TransactionId id = engine_->create_transaction(type, amount, party(from), party(to)).id;
  auto processed = engine_->process_transaction(id, retry_policy_);
  return Result::success(std::move(processed).value());
}

Outcome<WalletError, Transaction> WalletService::deposit(const CustomerId& customer, Money amount) {
  return move(customer, TransactionType::Deposit, amount, std::nullopt, WalletType::RealMoney);
}

Outcome<WalletError, Transaction> WalletService::withdraw(const CustomerId& customer, Money amount) {
  return move(customer, TransactionType::Withdrawal, amount, WalletType::RealMoney, std::nullopt);
}

Outcome<WalletError, Transaction> WalletService::emergency_allocate(const CustomerId& customer, Money amount) {
  return move(customer, TransactionType::Transfer, amount, WalletType::RealMoney, WalletType::EmergencyFunds);
}

Outcome<WalletError, Transaction> WalletService::emergency_release(const CustomerId& customer, Money amount) {
  return move(customer, TransactionType::Transfer, amount, WalletType::EmergencyFunds, WalletType::RealMoney);
}

Outcome<WalletError, RequestReceipt> WalletService::submit(const WalletRequest& request) {
  using Result = Outcome<WalletError, RequestReceipt>;
  auto from_txn = [](Outcome<WalletError, Transaction> r) {
    if (!r) return Result::failure(r.error());
    return Result::success(RequestReceipt{std::move(r).value(), std::nullopt});
  };
  auto from_investment = [](Outcome<InvestError, PendingRequest> r) {
    if (!r) {
      if (r.error().kind == InvestError::Kind::UnknownCustomer) {
        return Result::failure({WalletError::Kind::UnknownCustomer, {}});
      }
      return Result::failure({WalletError::Kind::Investment, r.error()});
    }
    return Result::success(RequestReceipt{std::nullopt, std::move(r).value()});
  };

  switch (request.kind) {
    case RequestType::Deposit:
      return from_txn(deposit(request.customer, request.amount));
    case RequestType::Withdraw:
      return from_txn(withdraw(request.customer, request.amount));
    case RequestType::EmergencyAllocation:
      return from_txn(emergency_allocate(request.customer, request.amount));
    case RequestType::EmergencyRelease:
      return from_txn(emergency_release(request.customer, request.amount));
    case RequestType::Investment:
      return from_investment(investments_->invest(request.customer, request.amount));
    case RequestType::Liquidation:
      return from_investment(investments_->liquidate(request.customer, request.amount));
  }
  return Result::failure({WalletError::Kind::UnknownCustomer, {}});
}

Outcome<WalletError, CustomerSummary> WalletService::summary(const CustomerId& customer) const {
  using Result = Outcome<WalletError, CustomerSummary>;
  if (!wallets_->has_customer(customer)) return Result::failure({WalletError::Kind::UnknownCustomer, {}});
  CustomerSummary out{customer, {}};
  for (const Wallet* w : wallets_->wallets_of(customer)) {
    WalletBalance wb{w->id, w->wallet_type, available_balance(*w, *ledger_), holding_balance(*w, *ledger_), {}};
    for (const auto& s : w->subwallets) {
      wb.subwallets.push_back({s.id, s.name, ledger_->balance(s.id, BalanceType::Available),
                               ledger_->balance(s.id, BalanceType::Holding)});
    }
    out.wallets.push_back(std::move(wb));
  }
  return Result::success(std::move(out));
}

}  // namespace dwallet
