#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dwallet/outcome.hpp"
#include "dwallet/system.hpp"

namespace dwallet {

/// State directory layout:
///   ledger.jsonl       one journal entry per line, seq order
///   wallets.json       wallets and subwallets
///   transactions.json  transactions and batches
///   policies.json      investment policies
///   pending.json       investment/liquidation requests and awaiting holds
///   clock.json         logical clock and id counters
///   gateway.json       gateway call log
struct CorruptState {
  std::string file;
  std::string reason;
};
std::string describe(const CorruptState& e);

Outcome<CorruptState, Unit> export_state(const WalletSystem& system, const std::filesystem::path& dir);

/// Rebuilds a system from dir. Every store invariant is re-checked; a
/// tampered ledger (e.g. an unbalanced pair) is rejected. A missing
/// directory yields an empty system.
Outcome<CorruptState, std::unique_ptr<WalletSystem>> import_state(const std::filesystem::path& dir,
                                                                  SystemConfig config);

}  // namespace dwallet
