#pragma once

#include <memory>

#include "dwallet/clock.hpp"
#include "dwallet/gateway.hpp"
#include "dwallet/ids.hpp"
#include "dwallet/investments.hpp"
#include "dwallet/ledger.hpp"
#include "dwallet/transactions.hpp"
#include "dwallet/wallet_store.hpp"
#include "dwallet/wallets.hpp"

namespace dwallet {

struct SystemConfig {
  FaultConfig faults;
  RetryPolicy retry_policy;
  BusinessCalendar calendar;
  Timestamp start = default_epoch();
};

/// Everything one engine instance owns, wired together. Not copyable or
/// movable: the services hold pointers into each other.
class WalletSystem {
 public:
  explicit WalletSystem(SystemConfig config = {});
  WalletSystem(const WalletSystem&) = delete;
  WalletSystem& operator=(const WalletSystem&) = delete;

  IdSource& ids() { return ids_; }
  ManualClock& clock() { return clock_; }
  WalletStore& wallet_store() { return wallets_; }
  Ledger& ledger() { return ledger_; }
  SimulatedGateway& gateway() { return gateway_; }
  TransactionEngine& engine() { return engine_; }
  InvestmentService& investments() { return investments_; }
  WalletService& wallet_service() { return wallet_service_; }

  const IdSource& ids() const { return ids_; }
  const ManualClock& clock() const { return clock_; }
  const WalletStore& wallet_store() const { return wallets_; }
  const Ledger& ledger() const { return ledger_; }
  const SimulatedGateway& gateway() const { return gateway_; }
  const TransactionEngine& engine() const { return engine_; }
  const InvestmentService& investments() const { return investments_; }
  const WalletService& wallet_service() const { return wallet_service_; }

  [[nodiscard]] const RetryPolicy& retry_policy() const { return retry_policy_; }
  void set_retry_policy(RetryPolicy p);

  /// Re-enters processing for a standalone transaction and lets the
  /// investment service pick up holds that complete.
  Outcome<EngineError, Transaction> retry_transaction(const TransactionId& id);

 private:
  RetryPolicy retry_policy_;
  IdSource ids_;
  ManualClock clock_;
  WalletStore wallets_;
  Ledger ledger_;
  SimulatedGateway gateway_;
  TransactionEngine engine_;
  InvestmentService investments_;
  WalletService wallet_service_;
};

}  // namespace dwallet
