#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dwallet/domain.hpp"
#include "dwallet/outcome.hpp"
#include "dwallet/wallet_store.hpp"

namespace dwallet {

/// One immutable ledger line. Internal entries (the external-bank side of a
/// movement) carry no wallet or subwallet reference.
struct JournalEntry {
  EntryId entry_id;
  TransactionId transaction_id;
  std::optional<WalletId> wallet_id;
  std::optional<SubwalletId> subwallet_id;
  Money amount;
  BalanceType balance_type = BalanceType::Internal;
  std::uint64_t seq = 0;  // 0 until committed
  Timestamp created_at{};

  friend bool operator==(const JournalEntry&, const JournalEntry&) = default;
};

/// Source and destination of one movement. Negative amount = source.
struct EntryPair {
  JournalEntry first;
  JournalEntry second;

  friend bool operator==(const EntryPair&, const EntryPair&) = default;
};

struct LedgerError {
  enum class Kind {
    UnbalancedPair,
    ZeroAmountEntry,
    UnknownWallet,
    UnknownSubwallet,
    MalformedEntry,
    NegativeBalance,
    BalanceOverflow,
  };
  Kind kind;
  std::string detail;
};
std::string_view to_string(LedgerError::Kind k);

/// Read access to committed (or staged) balances.
class BalanceReader {
 public:
  virtual ~BalanceReader() = default;
  /// Sum of entries for (subwallet, type); 0 when nothing matches.
  [[nodiscard]] virtual Money balance(const SubwalletId& subwallet, BalanceType type) const = 0;
};

/// Destination for journal pairs.
class JournalSink {
 public:
  virtual ~JournalSink() = default;
  virtual Outcome<LedgerError, EntryPair> post_pair(EntryPair pair) = 0;
};

/// Per wallet type: RealMoney and EmergencyFunds read their single
/// subwallet, Investment sums over all its subwallets.
Money available_balance(const Wallet& wallet, const BalanceReader& reader);
Money holding_balance(const Wallet& wallet, const BalanceReader& reader);

/// Structural checks on a pair that do not depend on current balances.
std::optional<LedgerError> check_pair_shape(const EntryPair& pair, const WalletStore& wallets);

/// Append-only journal with cached per-(subwallet, balance type) running sums.
class Ledger final : public BalanceReader, public JournalSink {
 public:
  explicit Ledger(const WalletStore& wallets) : wallets_(&wallets) {}

  Outcome<LedgerError, EntryPair> post_pair(EntryPair pair) override;
  /// Appends every pair or none of them.
  Outcome<LedgerError, std::vector<EntryPair>> post_pairs(std::vector<EntryPair> pairs);

  [[nodiscard]] Money balance(const SubwalletId& subwallet, BalanceType type) const override;
  Outcome<LedgerError, Money> balance_of(const SubwalletId& subwallet, BalanceType type) const;
  /// Definitional oracle: sums every committed entry. O(n).
  [[nodiscard]] Money scan_balance_of(const SubwalletId& subwallet, BalanceType type) const;

  Outcome<LedgerError, Money> available_balance(const WalletId& wallet) const;
  Outcome<LedgerError, Money> holding_balance(const WalletId& wallet) const;

  [[nodiscard]] std::vector<JournalEntry> entries_for_transaction(const TransactionId& id) const;
  [[nodiscard]] std::span<const JournalEntry> entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  /// Sum over all entries; zero whenever the ledger is consistent.
  [[nodiscard]] Money total() const { return total_; }
  [[nodiscard]] const std::map<std::pair<SubwalletId, BalanceType>, Money>& cached_balances() const {
    return balances_;
  }

  /// One JSON object per line, ordered by seq.
  void export_jsonl(std::ostream& out) const;
  [[nodiscard]] std::string export_jsonl() const;

  /// Replaces the content with persisted entries after re-checking pairing,
  /// conservation, seq order and non-negativity. Returns a reason on failure.
  Outcome<std::string, Unit> restore(std::vector<JournalEntry> entries);

 private:
  using BalanceKey = std::pair<SubwalletId, BalanceType>;

  std::optional<LedgerError> check_against_balances(std::span<const EntryPair> pairs) const;
  void append(JournalEntry entry);

  const WalletStore* wallets_;
  std::vector<JournalEntry> entries_;
  std::map<BalanceKey, Money> balances_;
  std::map<TransactionId, std::vector<std::size_t>> by_transaction_;
  Money total_;
  std::uint64_t next_seq_ = 1;
};

/// Uncommitted overlay on a ledger. Reads see base + staged pairs; nothing
/// reaches the base ledger until commit().
class StagedLedger final : public BalanceReader, public JournalSink {
 public:
  explicit StagedLedger(Ledger& base, const WalletStore& wallets) : base_(&base), wallets_(&wallets) {}

  Outcome<LedgerError, EntryPair> post_pair(EntryPair pair) override;
  [[nodiscard]] Money balance(const SubwalletId& subwallet, BalanceType type) const override;

  [[nodiscard]] const std::vector<EntryPair>& staged() const { return staged_; }
  Outcome<LedgerError, std::vector<EntryPair>> commit();
  void discard();

 private:
  Ledger* base_;
  const WalletStore* wallets_;
  std::vector<EntryPair> staged_;
  std::map<std::pair<SubwalletId, BalanceType>, Money> deltas_;
};

std::string entry_to_json_line(const JournalEntry& e);
std::optional<JournalEntry> entry_from_json_line(const std::string& line, std::string* why = nullptr);

}  // namespace dwallet
