#include "dwallet/ledger.hpp"

#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dwallet {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(LedgerError::Kind k) {
  switch (k) {
    case LedgerError::Kind::UnbalancedPair:
      return "UnbalancedPair";
    case LedgerError::Kind::ZeroAmountEntry:
      return "ZeroAmountEntry";
    case LedgerError::Kind::UnknownWallet:
      return "UnknownWallet";
    case LedgerError::Kind::UnknownSubwallet:
      return "UnknownSubwallet";
    case LedgerError::Kind::MalformedEntry:
      return "MalformedEntry";
    case LedgerError::Kind::NegativeBalance:
      return "NegativeBalance";
    case LedgerError::Kind::BalanceOverflow:
      return "BalanceOverflow";
  }
  return "LedgerError";
}

namespace {

Money sum_over(const Wallet& wallet, const BalanceReader& reader, BalanceType type) {
  switch (wallet.wallet_type) {
    case WalletType::RealMoney:
    case WalletType::EmergencyFunds:
      return reader.balance(wallet.primary_subwallet().id, type);
    case WalletType::Investment: {
      Money total;
      for (const auto& s : wallet.subwallets) total += reader.balance(s.id, type);
      return total;
    }
  }
  return Money{};
}

std::optional<LedgerError> check_entry_shape(const JournalEntry& e, const WalletStore& wallets) {
  using K = LedgerError::Kind;
  if (e.amount.is_zero()) return LedgerError{K::ZeroAmountEntry, e.entry_id.str()};
  const bool internal = e.balance_type == BalanceType::Internal;
  if (e.wallet_id.has_value() == internal || e.subwallet_id.has_value() == internal) {
    return LedgerError{K::MalformedEntry, "wallet reference must be absent exactly for INTERNAL entries: " +
                                              e.entry_id.str()};
  }
  if (internal) return std::nullopt;
  const Wallet* w = wallets.find_wallet(*e.wallet_id);
  if (w == nullptr) return LedgerError{K::UnknownWallet, e.wallet_id->str()};
  if (w->find_subwallet(*e.subwallet_id) == nullptr) return LedgerError{K::UnknownSubwallet, e.subwallet_id->str()};
  return std::nullopt;
}

}  // namespace

Money available_balance(const Wallet& wallet, const BalanceReader& reader) {
  return sum_over(wallet, reader, BalanceType::Available);
}

Money holding_balance(const Wallet& wallet, const BalanceReader& reader) {
  return sum_over(wallet, reader, BalanceType::Holding);
}

std::optional<LedgerError> check_pair_shape(const EntryPair& pair, const WalletStore& wallets) {
  if (auto e = check_entry_shape(pair.first, wallets)) return e;
  if (auto e = check_entry_shape(pair.second, wallets)) return e;
  if (pair.first.transaction_id != pair.second.transaction_id) {
    return LedgerError{LedgerError::Kind::MalformedEntry, "pair entries belong to different transactions"};
  }
  const auto sum = pair.first.amount.checked_add(pair.second.amount);
  if (!sum || !sum->is_zero()) {
    return LedgerError{LedgerError::Kind::UnbalancedPair, pair.first.transaction_id.str()};
  }
  return std::nullopt;
}

// --- Ledger ---

std::optional<LedgerError> Ledger::check_against_balances(std::span<const EntryPair> pairs) const {
  std::map<BalanceKey, Money> projected;
  auto apply = [&](const JournalEntry& e) -> std::optional<LedgerError> {
    if (!e.subwallet_id) return std::nullopt;
    const BalanceKey key{*e.subwallet_id, e.balance_type};
    auto it = projected.find(key);
    if (it == projected.end()) it = projected.emplace(key, balance(key.first, key.second)).first;
    const auto next = it->second.checked_add(e.amount);
    if (!next) return LedgerError{LedgerError::Kind::BalanceOverflow, key.first.str()};
    it->second = *next;
    return std::nullopt;
  };
  for (const auto& pair : pairs) {
    if (auto err = apply(pair.first)) return err;
    if (auto err = apply(pair.second)) return err;
    for (const auto& [key, value] : projected) {
      if (value.is_negative()) {
        return LedgerError{LedgerError::Kind::NegativeBalance,
                           key.first.str() + "/" + std::string(to_string(key.second))};
      }
    }
  }
  return std::nullopt;
}

void Ledger::append(JournalEntry entry) {
  entry.seq = next_seq_++;
  if (entry.subwallet_id) {
    balances_[{*entry.subwallet_id, entry.balance_type}] += entry.amount;
  }
  total_ += entry.amount;
  by_transaction_[entry.transaction_id].push_back(entries_.size());
  entries_.push_back(std::move(entry));
}

Outcome<LedgerError, EntryPair> Ledger::post_pair(EntryPair pair) {
  auto posted = post_pairs({std::move(pair)});
  if (!posted) return Outcome<LedgerError, EntryPair>::failure(posted.error());
  return Outcome<LedgerError, EntryPair>::success(std::move(posted).value().front());
}

Outcome<LedgerError, std::vector<EntryPair>> Ledger::post_pairs(std::vector<EntryPair> pairs) {
  using Result = Outcome<LedgerError, std::vector<EntryPair>>;
  for (const auto& p : pairs) {
    if (auto err = check_pair_shape(p, *wallets_)) return Result::failure(*err);
  }
  if (auto err = check_against_balances(pairs)) return Result::failure(*err);
  for (auto& p : pairs) {
    append(p.first);
    p.first.seq = entries_.back().seq;
    append(p.second);
    p.second.seq = entries_.back().seq;
  }
  return Result::success(std::move(pairs));
}

Money Ledger::balance(const SubwalletId& subwallet, BalanceType type) const {
  const auto it = balances_.find({subwallet, type});
  return it == balances_.end() ? Money{} : it->second;
}

Outcome<LedgerError, Money> Ledger::balance_of(const SubwalletId& subwallet, BalanceType type) const {
  if (wallets_->owner_of(subwallet) == nullptr) {
    return Outcome<LedgerError, Money>::failure({LedgerError::Kind::UnknownSubwallet, subwallet.str()});
  }
  return Outcome<LedgerError, Money>::success(balance(subwallet, type));
}

Money Ledger::scan_balance_of(const SubwalletId& subwallet, BalanceType type) const {
  Money sum;
  for (const auto& e : entries_) {
    if (e.balance_type == type && e.subwallet_id && *e.subwallet_id == subwallet) sum += e.amount;
  }
  return sum;
}

Outcome<LedgerError, Money> Ledger::available_balance(const WalletId& wallet) const {
  const Wallet* w = wallets_->find_wallet(wallet);
  if (w == nullptr) return Outcome<LedgerError, Money>::failure({LedgerError::Kind::UnknownWallet, wallet.str()});
  return Outcome<LedgerError, Money>::success(dwallet::available_balance(*w, *this));
}

Outcome<LedgerError, Money> Ledger::holding_balance(const WalletId& wallet) const {
  const Wallet* w = wallets_->find_wallet(wallet);
  if (w == nullptr) return Outcome<LedgerError, Money>::failure({LedgerError::Kind::UnknownWallet, wallet.str()});
  return Outcome<LedgerError, Money>::success(dwallet::holding_balance(*w, *this));
}

std::vector<JournalEntry> Ledger::entries_for_transaction(const TransactionId& id) const {
  std::vector<JournalEntry> out;
  if (const auto it = by_transaction_.find(id); it != by_transaction_.end()) {
    for (const auto pos : it->second) out.push_back(entries_[pos]);
  }
  return out;
}

void Ledger::export_jsonl(std::ostream& out) const {
  for (const auto& e : entries_) out << entry_to_json_line(e) << '\n';
}

std::string Ledger::export_jsonl() const {
  std::ostringstream out;
  export_jsonl(out);
  return out.str();
}

Outcome<std::string, Unit> Ledger::restore(std::vector<JournalEntry> entries) {
  using Result = Outcome<std::string, Unit>;
  Ledger rebuilt(*wallets_);
  std::set<TransactionId> seen;
  std::uint64_t last_seq = 0;
  for (const auto& e : entries) {
    if (e.seq <= last_seq) return Result::failure("seq not strictly increasing at " + e.entry_id.str());
    last_seq = e.seq;
  }
  if (entries.size() % 2 != 0) return Result::failure("odd number of entries; a pair is torn");
  for (std::size_t i = 0; i < entries.size(); i += 2) {
    EntryPair pair{entries[i], entries[i + 1]};
    if (!seen.insert(pair.first.transaction_id).second) {
      return Result::failure("transaction " + pair.first.transaction_id.str() + " has more than one pair");
    }
    if (auto err = check_pair_shape(pair, *wallets_)) {
      return Result::failure(std::string(to_string(err->kind)) + ": " + err->detail);
    }
    if (auto err = rebuilt.check_against_balances({&pair, 1})) {
      return Result::failure(std::string(to_string(err->kind)) + ": " + err->detail);
    }
    rebuilt.append(pair.first);
    rebuilt.entries_.back().seq = pair.first.seq;
    rebuilt.append(pair.second);
    rebuilt.entries_.back().seq = pair.second.seq;
  }
  rebuilt.next_seq_ = last_seq + 1;
  entries_ = std::move(rebuilt.entries_);
  balances_ = std::move(rebuilt.balances_);
  by_transaction_ = std::move(rebuilt.by_transaction_);
  total_ = rebuilt.total_;
  next_seq_ = rebuilt.next_seq_;
  return Result::success({});
}

// --- StagedLedger ---

Outcome<LedgerError, EntryPair> StagedLedger::post_pair(EntryPair pair) {
  using Result = Outcome<LedgerError, EntryPair>;
  if (auto err = check_pair_shape(pair, *wallets_)) return Result::failure(*err);

  std::map<std::pair<SubwalletId, BalanceType>, Money> next = deltas_;
  for (const auto* e : {&pair.first, &pair.second}) {
    if (!e->subwallet_id) continue;
    const std::pair key{*e->subwallet_id, e->balance_type};
    const auto delta = next[key].checked_add(e->amount);
    const auto projected = delta ? base_->balance(key.first, key.second).checked_add(*delta) : std::nullopt;
    if (!projected) return Result::failure({LedgerError::Kind::BalanceOverflow, key.first.str()});
    if (projected->is_negative()) return Result::failure({LedgerError::Kind::NegativeBalance, key.first.str()});
    next[key] = *delta;
  }
  deltas_ = std::move(next);
  staged_.push_back(pair);
  return Result::success(std::move(pair));
}

Money StagedLedger::balance(const SubwalletId& subwallet, BalanceType type) const {
  const auto it = deltas_.find({subwallet, type});
  const Money base = base_->balance(subwallet, type);
  return it == deltas_.end() ? base : base + it->second;
}

Outcome<LedgerError, std::vector<EntryPair>> StagedLedger::commit() {
  auto result = base_->post_pairs(staged_);
  discard();
  return result;
}

void StagedLedger::discard() {
  staged_.clear();
  deltas_.clear();
}

// --- JSON Lines ---

std::string entry_to_json_line(const JournalEntry& e) {
  ordered_json j;
  j["entry_id"] = e.entry_id.str();
  j["transaction_id"] = e.transaction_id.str();
  j["wallet_id"] = e.wallet_id ? ordered_json(e.wallet_id->str()) : ordered_json(nullptr);
  j["subwallet_id"] = e.subwallet_id ? ordered_json(e.subwallet_id->str()) : ordered_json(nullptr);
  j["amount"] = e.amount.minor_units();
  j["balance_type"] = std::string(to_string(e.balance_type));
  j["seq"] = e.seq;
  j["created_at"] = format_timestamp(e.created_at);
  return j.dump();
}

std::optional<JournalEntry> entry_from_json_line(const std::string& line, std::string* why) {
  auto fail = [why](std::string reason) -> std::optional<JournalEntry> {
    if (why) *why = std::move(reason);
    return std::nullopt;
  };
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return fail("not a JSON object");
  static constexpr const char* kFields[] = {"entry_id", "transaction_id", "wallet_id", "subwallet_id",
                                            "amount",   "balance_type",   "seq",       "created_at"};
  for (const char* f : kFields) {
    if (!j.contains(f)) return fail(std::string("missing field ") + f);
  }
  if (j.size() != std::size(kFields)) return fail("unexpected extra fields");
  if (!j["entry_id"].is_string() || !j["transaction_id"].is_string() || !j["amount"].is_number_integer() ||
      !j["balance_type"].is_string() || !j["seq"].is_number_unsigned() || !j["created_at"].is_string()) {
    return fail("field has the wrong type");
  }
  JournalEntry e;
  e.entry_id = EntryId{j["entry_id"].get<std::string>()};
  e.transaction_id = TransactionId{j["transaction_id"].get<std::string>()};
  for (const auto& [name, target] : {std::pair{"wallet_id", 0}, std::pair{"subwallet_id", 1}}) {
    const auto& v = j[name];
    if (v.is_null()) continue;
    if (!v.is_string()) return fail(std::string(name) + " must be string or null");
    if (target == 0) {
      e.wallet_id = WalletId{v.get<std::string>()};
    } else {
      e.subwallet_id = SubwalletId{v.get<std::string>()};
    }
  }
  e.amount = Money{j["amount"].get<std::int64_t>()};
  const auto bt = parse_balance_type(j["balance_type"].get<std::string>());
  if (!bt) return fail("unknown balance_type");
  e.balance_type = *bt;
  e.seq = j["seq"].get<std::uint64_t>();
  const auto ts = parse_timestamp(j["created_at"].get<std::string>());
  if (!ts) return fail("bad created_at");
  e.created_at = *ts;
  return e;
}

}  // namespace dwallet
