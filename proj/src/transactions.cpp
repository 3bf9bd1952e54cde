#include "dwallet/transactions.hpp"

#include <cassert>
#include <set>

#include "name_table.hpp"

namespace dwallet {

namespace {

constexpr detail::NameTable<InvalidReason, 6> kInvalidReasons{{
    {InvalidReason::IncompatibleWallet, "IncompatibleWallet"},
    {InvalidReason::IncompatibleRoute, "IncompatibleRoute"},
    {InvalidReason::InsufficientFunds, "InsufficientFunds"},
    {InvalidReason::SameSubwallet, "SameSubwallet"},
    {InvalidReason::UnknownParty, "UnknownParty"},
    {InvalidReason::NonPositiveAmount, "NonPositiveAmount"},
}};

constexpr detail::NameTable<BatchStatus, 3> kBatchStatuses{{
    {BatchStatus::Pending, "PENDING"},
    {BatchStatus::Completed, "COMPLETED"},
    {BatchStatus::Failed, "FAILED"},
}};

}  // namespace

std::string_view to_string(InvalidReason r) { return detail::name_of(kInvalidReasons, r); }
std::optional<InvalidReason> parse_invalid_reason(std::string_view s) { return detail::value_of(kInvalidReasons, s); }
std::string_view to_string(BatchStatus s) { return detail::name_of(kBatchStatuses, s); }
std::optional<BatchStatus> parse_batch_status(std::string_view s) { return detail::value_of(kBatchStatuses, s); }

std::string_view to_string(ExecutionError::Kind k) {
  switch (k) {
    case ExecutionError::Kind::TransientGatewayError:
      return "TransientGatewayError";
    case ExecutionError::Kind::LedgerPostError:
      return "LedgerPostError";
  }
  return "ExecutionError";
}

std::string_view to_string(EngineError::Kind k) {
  switch (k) {
    case EngineError::Kind::UnknownTransaction:
      return "UnknownTransaction";
    case EngineError::Kind::UnknownBatch:
      return "UnknownBatch";
    case EngineError::Kind::NotRetryable:
      return "NotRetryable";
    case EngineError::Kind::BatchMember:
      return "BatchMember";
    case EngineError::Kind::AlreadyInBatch:
      return "AlreadyInBatch";
    case EngineError::Kind::StateError:
      return "StateError";
  }
  return "EngineError";
}

// --- Validation ---

namespace {

struct Resolved {
  const Wallet* wallet = nullptr;  // null for External
  const Subwallet* subwallet = nullptr;
};

std::optional<Resolved> resolve(const Party& party, const WalletStore& wallets) {
  const auto* ref = party.wallet_ref();
  if (ref == nullptr) return Resolved{};
  const Wallet* w = wallets.find_wallet(ref->wallet_id);
  if (w == nullptr) return std::nullopt;
  const Subwallet* s = w->find_subwallet(ref->subwallet_id);
  if (s == nullptr) return std::nullopt;
  return Resolved{w, s};
}

bool is_pair_of(WalletType a, WalletType b, WalletType x, WalletType y) {
  return (a == x && b == y) || (a == y && b == x);
}

std::optional<InvalidReason> check_route(TransactionType type, const Resolved& from, const Resolved& to) {
  const bool from_internal = from.wallet != nullptr;
  const bool to_internal = to.wallet != nullptr;
  switch (type) {
    case TransactionType::Deposit:
      if (from_internal || !to_internal) return InvalidReason::IncompatibleRoute;
      if (to.wallet->wallet_type != WalletType::RealMoney) return InvalidReason::IncompatibleWallet;
      return std::nullopt;
    case TransactionType::Withdrawal:
      if (!from_internal || to_internal) return InvalidReason::IncompatibleRoute;
      if (from.wallet->wallet_type != WalletType::RealMoney) return InvalidReason::IncompatibleWallet;
      return std::nullopt;
    case TransactionType::Hold:
      if (!from_internal || !to_internal) return InvalidReason::IncompatibleRoute;
      if (from.subwallet->id != to.subwallet->id) return InvalidReason::IncompatibleRoute;
      if (from.wallet->wallet_type != WalletType::RealMoney && from.wallet->wallet_type != WalletType::Investment) {
        return InvalidReason::IncompatibleWallet;
      }
      return std::nullopt;
    case TransactionType::Transfer:
    case TransactionType::TransferFromHold: {
      if (!from_internal || !to_internal) return InvalidReason::IncompatibleRoute;
      if (from.subwallet->id == to.subwallet->id) return InvalidReason::SameSubwallet;
      if (from.wallet->customer != to.wallet->customer) return InvalidReason::IncompatibleRoute;
      const WalletType partner =
          type == TransactionType::Transfer ? WalletType::EmergencyFunds : WalletType::Investment;
      if (!is_pair_of(from.wallet->wallet_type, to.wallet->wallet_type, WalletType::RealMoney, partner)) {
        return InvalidReason::IncompatibleWallet;
      }
      return std::nullopt;
    }
  }
  return InvalidReason::IncompatibleRoute;
}

/// Balance the originator must cover, or nullopt when no check applies.
std::optional<BalanceType> funding_balance(TransactionType type) {
  switch (type) {
    case TransactionType::Deposit:
      return std::nullopt;
    case TransactionType::Withdrawal:
    case TransactionType::Transfer:
    case TransactionType::Hold:
      return BalanceType::Available;
    case TransactionType::TransferFromHold:
      return BalanceType::Holding;
  }
  return std::nullopt;
}

bool uses_gateway(TransactionType type) {
  return type == TransactionType::Deposit || type == TransactionType::Withdrawal;
}

}  // namespace

ValidationOutcome validate(const Transaction& txn, const WalletStore& wallets, const BalanceReader& balances) {
  if (!txn.amount.is_positive()) return ValidationOutcome::invalid(InvalidReason::NonPositiveAmount);

  const auto from = resolve(txn.originator, wallets);
  const auto to = resolve(txn.beneficiary, wallets);
  if (!from || !to) return ValidationOutcome::invalid(InvalidReason::UnknownParty);

  if (const auto bad_route = check_route(txn.txn_type, *from, *to)) return ValidationOutcome::invalid(*bad_route);

  if (const auto balance_type = funding_balance(txn.txn_type)) {
    if (balances.balance(from->subwallet->id, *balance_type) < txn.amount) {
      return ValidationOutcome::invalid(InvalidReason::InsufficientFunds);
    }
  }
  return ValidationOutcome::valid();
}

// --- Journal pairs ---

EntryPair journal_pair_for(const Transaction& txn, Timestamp at) {
  auto entry = [&](int n, const Party& party, BalanceType type, Money amount) {
    JournalEntry e;
    e.entry_id = EntryId{txn.id.str() + ":" + std::to_string(n)};
    e.transaction_id = txn.id;
    e.amount = amount;
    e.balance_type = type;
    e.created_at = at;
    if (type != BalanceType::Internal) {
      const auto* ref = party.wallet_ref();
      assert(ref != nullptr);
      e.wallet_id = ref->wallet_id;
      e.subwallet_id = ref->subwallet_id;
    }
    return e;
  };
  const Money out = -txn.amount;
  const Money in = txn.amount;
  switch (txn.txn_type) {
    case TransactionType::Deposit:
      return {entry(1, txn.originator, BalanceType::Internal, out), entry(2, txn.beneficiary, BalanceType::Available, in)};
    case TransactionType::Withdrawal:
      return {entry(1, txn.originator, BalanceType::Available, out), entry(2, txn.beneficiary, BalanceType::Internal, in)};
    case TransactionType::Transfer:
      return {entry(1, txn.originator, BalanceType::Available, out), entry(2, txn.beneficiary, BalanceType::Available, in)};
    case TransactionType::Hold:
      return {entry(1, txn.originator, BalanceType::Available, out), entry(2, txn.originator, BalanceType::Holding, in)};
    case TransactionType::TransferFromHold:
      return {entry(1, txn.originator, BalanceType::Holding, out), entry(2, txn.beneficiary, BalanceType::Available, in)};
  }
  assert(false && "unhandled transaction type");
  return {};
}

// --- Execution ---

Outcome<ExecutionError, EntryPair> execute(Transaction& txn, JournalSink& sink, BankGateway& gateway, Timestamp at) {
  using Result = Outcome<ExecutionError, EntryPair>;
  ++txn.attempts;

  const bool external = uses_gateway(txn.txn_type);
  if (external) {
    const bool inbound = txn.txn_type == TransactionType::Deposit;
    const Party& outside = inbound ? txn.originator : txn.beneficiary;
    const auto* account = outside.external_account();
    GatewayRequest req{inbound ? TransferDirection::Inbound : TransferDirection::Outbound, txn.amount,
                       account && account->reference ? *account->reference : std::string{}, txn.id};
    auto confirmed = gateway.external_transfer(req);
    if (!confirmed) {
      return Result::failure({ExecutionError::Kind::TransientGatewayError, confirmed.error().detail});
    }
  }

  auto posted = sink.post_pair(journal_pair_for(txn, at));
  if (!posted) {
    if (external) (void)gateway.compensate(txn.id);
    return Result::failure({ExecutionError::Kind::LedgerPostError,
                            std::string(to_string(posted.error().kind)) + ": " + posted.error().detail});
  }
  return Result::success(std::move(posted).value());
}

// --- Status machine ---

std::string describe(const StateError& e) {
  const char* what = e.kind == StateError::Kind::TerminalState ? "TerminalState" : "IllegalTransition";
  return std::string(what) + "(" + std::string(to_string(e.from)) + " on " + std::string(to_string(e.event)) + ")";
}

Outcome<StateError, Transaction> transition(Transaction txn, TransactionEvent event) {
  using S = TransactionStatus;
  using E = TransactionEvent;
  using Result = Outcome<StateError, Transaction>;

  std::optional<S> next;
  switch (txn.status) {
    case S::Failed:
    case S::Completed:
      return Result::failure({StateError::Kind::TerminalState, txn.status, event});
    case S::Processing:
      switch (event) {
        case E::ValidationFailed:
          next = S::Failed;
          break;
        case E::ExecutionSucceeded:
          next = S::Completed;
          break;
        case E::ExecutionFailedTransiently:
          next = S::TransientError;
          break;
        case E::RetriesExhausted:
          break;
      }
      break;
    case S::TransientError:
      switch (event) {
        case E::ValidationFailed:
        case E::RetriesExhausted:
          next = S::Failed;
          break;
        case E::ExecutionSucceeded:
          next = S::Completed;
          break;
        case E::ExecutionFailedTransiently:
          next = S::TransientError;
          break;
      }
      break;
  }
  if (!next) return Result::failure({StateError::Kind::IllegalTransition, txn.status, event});
  txn.status = *next;
  txn.history.push_back(event);
  return Result::success(std::move(txn));
}

bool replay_is_sound(std::span<const TransactionEvent> history, TransactionStatus expected_final) {
  Transaction probe;
  for (const auto event : history) {
    auto next = transition(std::move(probe), event);
    if (!next) return false;
    probe = std::move(next).value();
  }
  return probe.status == expected_final;
}

// --- Engine ---

TransactionEngine::TransactionEngine(const WalletStore& wallets, Ledger& ledger, BankGateway& gateway,
                                     const Clock& clock, IdSource& ids)
    : wallets_(&wallets), ledger_(&ledger), gateway_(&gateway), clock_(&clock), ids_(&ids) {}

const Transaction& TransactionEngine::create_transaction(TransactionType type, Money amount, Party originator,
                                                         Party beneficiary) {
  Transaction txn;
  txn.id = TransactionId{ids_->next("txn")};
  txn.txn_type = type;
  txn.amount = amount;
  txn.originator = std::move(originator);
  txn.beneficiary = std::move(beneficiary);
  txn.created_at = clock_->now();
  index_[txn.id] = transactions_.size();
  transactions_.push_back(std::move(txn));
  return transactions_.back();
}

const Transaction* TransactionEngine::find(const TransactionId& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &transactions_[it->second];
}

const Batch* TransactionEngine::find_batch(const BatchId& id) const {
  const auto it = batch_index_.find(id);
  return it == batch_index_.end() ? nullptr : &batches_[it->second];
}

Transaction& TransactionEngine::at(const TransactionId& id) { return transactions_[index_.at(id)]; }

void TransactionEngine::apply(Transaction& txn, TransactionEvent event) {
  auto next = transition(txn, event);
  assert(next.ok() && "engine attempted an illegal status transition");
  if (next) txn = std::move(next).value();
}

TransactionEngine::StepResult TransactionEngine::validate_and_execute(Transaction& txn, const BalanceReader& balances,
                                                                      JournalSink& sink,
                                                                      const RetryPolicy& policy) {
  const auto verdict = validate(txn, *wallets_, balances);
  if (!verdict.is_valid()) {
    txn.last_error = ErrorInfo{std::string(to_string(verdict.reason())), "validation failed"};
    return StepResult::ValidationFailed;
  }
  auto result = retry([&] { return execute(txn, sink, *gateway_, clock_->now()); }, policy);
  if (result) {
    txn.last_error.reset();
    return StepResult::Executed;
  }
  txn.last_error = ErrorInfo{std::string(to_string(result.error().kind)), result.error().detail};
  return StepResult::Transient;
}

Outcome<EngineError, Transaction> TransactionEngine::process_transaction(const TransactionId& id,
                                                                         const RetryPolicy& policy) {
  using Result = Outcome<EngineError, Transaction>;
  if (find(id) == nullptr) return Result::failure({EngineError::Kind::UnknownTransaction, id.str()});
  Transaction& txn = at(id);
  if (txn.status != TransactionStatus::Processing && txn.status != TransactionStatus::TransientError) {
    return Result::failure({EngineError::Kind::NotRetryable, std::string(to_string(txn.status))});
  }
  switch (validate_and_execute(txn, *ledger_, *ledger_, policy)) {
    case StepResult::Executed:
      apply(txn, TransactionEvent::ExecutionSucceeded);
      break;
    case StepResult::ValidationFailed:
      apply(txn, TransactionEvent::ValidationFailed);
      break;
    case StepResult::Transient:
      apply(txn, TransactionEvent::ExecutionFailedTransiently);
      break;
  }
  return Result::success(txn);
}

Outcome<EngineError, Transaction> TransactionEngine::retry_transaction(const TransactionId& id,
                                                                       const RetryPolicy& policy) {
  const Transaction* txn = find(id);
  if (txn == nullptr) return Outcome<EngineError, Transaction>::failure({EngineError::Kind::UnknownTransaction, id.str()});
  if (txn->batch_id) {
    return Outcome<EngineError, Transaction>::failure({EngineError::Kind::BatchMember, txn->batch_id->str()});
  }
  return process_transaction(id, policy);
}

Outcome<EngineError, Transaction> TransactionEngine::abandon_transaction(const TransactionId& id) {
  using Result = Outcome<EngineError, Transaction>;
  if (find(id) == nullptr) return Result::failure({EngineError::Kind::UnknownTransaction, id.str()});
  Transaction& txn = at(id);
  auto next = transition(txn, TransactionEvent::RetriesExhausted);
  if (!next) return Result::failure({EngineError::Kind::StateError, describe(next.error())});
  txn = std::move(next).value();
  return Result::success(txn);
}

Outcome<EngineError, Batch> TransactionEngine::create_batch(const std::vector<TransactionId>& members) {
  using Result = Outcome<EngineError, Batch>;
  std::set<TransactionId> unique;
  for (const auto& id : members) {
    const Transaction* txn = find(id);
    if (txn == nullptr) return Result::failure({EngineError::Kind::UnknownTransaction, id.str()});
    if (txn->batch_id || !unique.insert(id).second) return Result::failure({EngineError::Kind::AlreadyInBatch, id.str()});
    if (is_terminal(txn->status)) return Result::failure({EngineError::Kind::NotRetryable, id.str()});
  }
  Batch batch{BatchId{ids_->next("batch")}, members, BatchStatus::Pending};
  for (const auto& id : members) at(id).batch_id = batch.id;
  batch_index_[batch.id] = batches_.size();
  batches_.push_back(batch);
  return Result::success(std::move(batch));
}

Outcome<EngineError, Batch> TransactionEngine::retry_batch(const BatchId& id, const RetryPolicy& policy) {
  using Result = Outcome<EngineError, Batch>;
  const auto found = batch_index_.find(id);
  if (found == batch_index_.end()) return Result::failure({EngineError::Kind::UnknownBatch, id.str()});
  Batch& batch = batches_[found->second];
  if (batch.status == BatchStatus::Completed) return Result::success(batch);

  StagedLedger staging(*ledger_, *wallets_);
  std::vector<TransactionId> executed;
  bool failed = false;
  for (const auto& member : batch.members) {
    Transaction& txn = at(member);
    if (txn.status == TransactionStatus::Completed) continue;
    if (txn.status == TransactionStatus::Failed) {
      failed = true;
      break;
    }
    const auto step = validate_and_execute(txn, staging, staging, policy);
    if (step == StepResult::Executed) {
      executed.push_back(member);
      continue;
    }
    apply(txn, step == StepResult::ValidationFailed ? TransactionEvent::ValidationFailed
                                                    : TransactionEvent::ExecutionFailedTransiently);
    failed = true;
    break;
  }

  if (!failed) {
    auto committed = staging.commit();
    if (committed) {
      for (const auto& member : executed) apply(at(member), TransactionEvent::ExecutionSucceeded);
      batch.status = BatchStatus::Completed;
      return Result::success(batch);
    }
    for (const auto& member : executed) {
      at(member).last_error = ErrorInfo{"LedgerPostError", std::string(to_string(committed.error().kind))};
    }
  }

  staging.discard();
  for (const auto& member : executed) {
    Transaction& txn = at(member);
    if (uses_gateway(txn.txn_type)) (void)gateway_->compensate(txn.id);
  }
  batch.status = BatchStatus::Failed;
  return Result::success(batch);
}

Outcome<std::string, Unit> TransactionEngine::restore(std::vector<Transaction> transactions,
                                                      std::vector<Batch> batches) {
  using Result = Outcome<std::string, Unit>;
  std::map<TransactionId, std::size_t> index;
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    const auto& t = transactions[i];
    if (t.id.empty() || !index.emplace(t.id, i).second) return Result::failure("duplicate or empty transaction id");
    if (t.attempts < 0) return Result::failure("negative attempts on " + t.id.str());
    if (!replay_is_sound(t.history, t.status)) {
      return Result::failure("status history of " + t.id.str() + " does not replay to its status");
    }
  }
  std::map<BatchId, std::size_t> batch_index;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    const auto& b = batches[i];
    if (b.id.empty() || !batch_index.emplace(b.id, i).second) return Result::failure("duplicate or empty batch id");
    for (const auto& m : b.members) {
      const auto it = index.find(m);
      if (it == index.end()) return Result::failure("batch " + b.id.str() + " references unknown " + m.str());
      if (transactions[it->second].batch_id != b.id) {
        return Result::failure("transaction " + m.str() + " does not carry batch id " + b.id.str());
      }
    }
  }
  for (const auto& t : transactions) {
    if (t.batch_id && !batch_index.contains(*t.batch_id)) {
      return Result::failure("transaction " + t.id.str() + " references unknown batch");
    }
  }
  transactions_ = std::move(transactions);
  index_ = std::move(index);
  batches_ = std::move(batches);
  batch_index_ = std::move(batch_index);
  return Result::success({});
}

}  // namespace dwallet
