#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwallet/domain.hpp"
#include "dwallet/gateway.hpp"
#include "dwallet/ledger.hpp"
#include "dwallet/outcome.hpp"
#include "dwallet/retry.hpp"
#include "dwallet/wallet_store.hpp"

namespace dwallet {

enum class InvalidReason {
  IncompatibleWallet,
  IncompatibleRoute,
  InsufficientFunds,
  SameSubwallet,
  UnknownParty,
  NonPositiveAmount,
};
std::string_view to_string(InvalidReason r);
std::optional<InvalidReason> parse_invalid_reason(std::string_view s);

class ValidationOutcome {
 public:
  static ValidationOutcome valid() { return ValidationOutcome{std::nullopt}; }
  static ValidationOutcome invalid(InvalidReason r) { return ValidationOutcome{r}; }

  [[nodiscard]] bool is_valid() const { return !reason_; }
  /// Only meaningful when !is_valid().
  [[nodiscard]] InvalidReason reason() const { return *reason_; }

  friend bool operator==(const ValidationOutcome&, const ValidationOutcome&) = default;

 private:
  explicit ValidationOutcome(std::optional<InvalidReason> r) : reason_(r) {}
  std::optional<InvalidReason> reason_;
};

/// Checks, in this order: amount > 0, party resolution, route compatibility,
/// then sufficient funds (every type except Deposit).
///
/// Route rules:
///   Deposit           External -> RealMoney
///   Withdrawal        RealMoney -> External
///   Transfer          RealMoney <-> EmergencyFunds, same customer
///   Hold              same subwallet, RealMoney or Investment
///   TransferFromHold  RealMoney <-> Investment, same customer
ValidationOutcome validate(const Transaction& txn, const WalletStore& wallets, const BalanceReader& balances);

/// Journal pair for a validated transaction. Pure; entry ids derive from the
/// transaction id.
EntryPair journal_pair_for(const Transaction& txn, Timestamp at);

struct ExecutionError {
  enum class Kind { TransientGatewayError, LedgerPostError };
  Kind kind;
  std::string detail;
};
std::string_view to_string(ExecutionError::Kind k);

/// Runs one execution attempt: the gateway call for Deposit/Withdrawal, then
/// posting the journal pair. Increments txn.attempts. A gateway transfer
/// whose ledger post fails is compensated before returning.
Outcome<ExecutionError, EntryPair> execute(Transaction& txn, JournalSink& sink, BankGateway& gateway,
                                           Timestamp at);

struct StateError {
  enum class Kind { TerminalState, IllegalTransition };
  Kind kind;
  TransactionStatus from;
  TransactionEvent event;
};
std::string describe(const StateError& e);

/// Status machine:
///   Processing     --ValidationFailed-->            Failed
///   Processing     --ExecutionSucceeded-->          Completed
///   Processing     --ExecutionFailedTransiently-->  TransientError
///   TransientError --ExecutionSucceeded-->          Completed
///   TransientError --ExecutionFailedTransiently-->  TransientError
///   TransientError --RetriesExhausted-->            Failed
///   TransientError --ValidationFailed-->            Failed   (revalidation on retry)
/// Failed and Completed accept no events.
Outcome<StateError, Transaction> transition(Transaction txn, TransactionEvent event);

/// Replays a history from Processing; false if any edge is illegal.
bool replay_is_sound(std::span<const TransactionEvent> history, TransactionStatus expected_final);

enum class BatchStatus { Pending, Completed, Failed };
std::string_view to_string(BatchStatus s);
std::optional<BatchStatus> parse_batch_status(std::string_view s);

struct Batch {
  BatchId id;
  std::vector<TransactionId> members;
  BatchStatus status = BatchStatus::Pending;

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct EngineError {
  enum class Kind { UnknownTransaction, UnknownBatch, NotRetryable, BatchMember, AlreadyInBatch, StateError };
  Kind kind;
  std::string detail;
};
std::string_view to_string(EngineError::Kind k);

/// Transaction service: owns the transaction and batch stores and is the
/// single writer of the ledger.
class TransactionEngine {
 public:
  TransactionEngine(const WalletStore& wallets, Ledger& ledger, BankGateway& gateway, const Clock& clock,
                    IdSource& ids);

  /// Always succeeds; bad data is caught by validation.
  const Transaction& create_transaction(TransactionType type, Money amount, Party originator,
                                        Party beneficiary);

  /// Validate, then execute with retries. Requires status Processing or
  /// TransientError; returns the stored transaction after processing.
  Outcome<EngineError, Transaction> process_transaction(const TransactionId& id, const RetryPolicy& policy);
  /// process_transaction for a standalone transaction that is not in a batch.
  Outcome<EngineError, Transaction> retry_transaction(const TransactionId& id, const RetryPolicy& policy);
  /// TransientError -> Failed.
  Outcome<EngineError, Transaction> abandon_transaction(const TransactionId& id);

  /// Groups standalone, non-terminal transactions into a new Pending batch.
  Outcome<EngineError, Batch> create_batch(const std::vector<TransactionId>& members);
  /// Processes members in order against a staging overlay. Either every
  /// member completes and all pairs are committed together, or nothing is
  /// committed, external transfers are compensated and members that had
  /// executed keep their pre-batch status. Members already Completed are
  /// skipped.
  Outcome<EngineError, Batch> retry_batch(const BatchId& id, const RetryPolicy& policy);

  [[nodiscard]] const Transaction* find(const TransactionId& id) const;
  [[nodiscard]] const Batch* find_batch(const BatchId& id) const;
  [[nodiscard]] const std::vector<Transaction>& transactions() const { return transactions_; }
  [[nodiscard]] const std::vector<Batch>& batches() const { return batches_; }

  Outcome<std::string, Unit> restore(std::vector<Transaction> transactions, std::vector<Batch> batches);

 private:
  enum class StepResult { Executed, ValidationFailed, Transient };

  Transaction& at(const TransactionId& id);
  StepResult validate_and_execute(Transaction& txn, const BalanceReader& balances, JournalSink& sink,
                                  const RetryPolicy& policy);
  void apply(Transaction& txn, TransactionEvent event);

  const WalletStore* wallets_;
  Ledger* ledger_;
  BankGateway* gateway_;
  const Clock* clock_;
  IdSource* ids_;
  std::vector<Transaction> transactions_;
  std::map<TransactionId, std::size_t> index_;
  std::vector<Batch> batches_;
  std::map<BatchId, std::size_t> batch_index_;
};

}  // namespace dwallet
