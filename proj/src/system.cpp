#include "dwallet/system.hpp"

namespace dwallet {

WalletSystem::WalletSystem(SystemConfig config)
    : retry_policy_(config.retry_policy),
      clock_(config.start),
      wallets_(ids_),
      ledger_(wallets_),
      gateway_(config.faults),
      engine_(wallets_, ledger_, gateway_, clock_, ids_),
      investments_(wallets_, engine_, clock_, ids_, std::move(config.calendar), retry_policy_),
      wallet_service_(wallets_, ledger_, engine_, investments_, retry_policy_) {}

void WalletSystem::set_retry_policy(RetryPolicy p) {
  retry_policy_ = p;
  wallet_service_.set_retry_policy(p);
  investments_.set_retry_policy(p);
}

Outcome<EngineError, Transaction> WalletSystem::retry_transaction(const TransactionId& id) {
  auto result = engine_.retry_transaction(id, retry_policy_);
  if (result) investments_.on_transaction_updated(result.value());
  return result;
}

}  // namespace dwallet
