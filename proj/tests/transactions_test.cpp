#include <gtest/gtest.h>

#include <random>

#include "dwallet/transactions.hpp"
#include "test_support.hpp"

namespace dwallet {
namespace {

using testing::Fixture;
using S = TransactionStatus;
using E = TransactionEvent;
using T = TransactionType;

class TransactionsTest : public ::testing::Test {
 protected:
  TransactionEngine& engine() { return f.system->engine(); }
  Transaction make(T type, std::int64_t amount, Party from, Party to) {
    return engine().create_transaction(type, Money{amount}, std::move(from), std::move(to));
  }
  ValidationOutcome check(const Transaction& t) {
    return validate(t, f.system->wallet_store(), f.system->ledger());
  }
  void fund(std::int64_t amount) { ASSERT_EQ(f.run(T::Deposit, Money{amount}, Party::external(), f.rm()).status, S::Completed); }
  Fixture f;
};

TEST_F(TransactionsTest, CreationIsUnconditional) {
  const auto& t = make(T::Transfer, 100, f.rm(), f.inv(0));
  EXPECT_EQ(t.status, S::Processing);
  EXPECT_EQ(t.attempts, 0);
  EXPECT_EQ(make(T::Hold, 500, f.rm(), f.rm()).status, S::Processing);
  EXPECT_EQ(make(T::Deposit, -5, Party::external(), f.rm()).status, S::Processing);
}

TEST_F(TransactionsTest, ValidationExamples) {
  EXPECT_TRUE(check(make(T::Deposit, 100, Party::external(), f.rm())).is_valid());
  EXPECT_EQ(check(make(T::Deposit, 100, Party::external(), f.inv(0))), ValidationOutcome::invalid(InvalidReason::IncompatibleWallet));
  fund(100);
  EXPECT_EQ(check(make(T::Withdrawal, 999999, f.rm(), Party::external())),
            ValidationOutcome::invalid(InvalidReason::InsufficientFunds));
}

TEST_F(TransactionsTest, ValidationOrderIsAmountPartiesRouteBalance) {
  const Party ghost = Party::wallet(WalletId{"wal-x"}, SubwalletId{"sw-x"});
  EXPECT_EQ(check(make(T::Transfer, 0, ghost, f.inv(0))).reason(), InvalidReason::NonPositiveAmount);
  EXPECT_EQ(check(make(T::Transfer, 5, ghost, f.inv(0))).reason(), InvalidReason::UnknownParty);
  EXPECT_EQ(check(make(T::Transfer, 5, f.rm(), f.inv(0))).reason(), InvalidReason::IncompatibleWallet);
  EXPECT_EQ(check(make(T::Transfer, 5, f.rm(), f.ef())).reason(), InvalidReason::InsufficientFunds);
  // Subwallet that exists but under another wallet id.
  const Party mismatched = Party::wallet(f.wallets.emergency_funds.id, f.rm_sub().id);
  EXPECT_EQ(check(make(T::Transfer, 5, mismatched, f.ef())).reason(), InvalidReason::UnknownParty);
}

TEST_F(TransactionsTest, HoldNeedsSameSubwallet) {
  fund(1000);
  EXPECT_TRUE(check(make(T::Hold, 500, f.rm(), f.rm())).is_valid());
  EXPECT_EQ(check(make(T::Hold, 500, f.inv(0), f.inv(1))).reason(), InvalidReason::IncompatibleRoute);
  EXPECT_EQ(check(make(T::Hold, 500, f.ef(), f.ef())).reason(), InvalidReason::IncompatibleWallet);
  EXPECT_EQ(check(make(T::Transfer, 5, f.rm(), f.rm())).reason(), InvalidReason::SameSubwallet);
}

TEST_F(TransactionsTest, CrossCustomerTransferIsRejected) {
  const auto bob = f.system->wallet_store().create_customer_wallets(CustomerId{"bob"}, {"x"}).value();
  fund(1000);
  const Party bob_ef = Party::of(bob.emergency_funds, bob.emergency_funds.primary_subwallet());
  EXPECT_EQ(check(make(T::Transfer, 5, f.rm(), bob_ef)).reason(), InvalidReason::IncompatibleRoute);
}

TEST_F(TransactionsTest, JournalPairLayouts) {
  const auto at = default_epoch();
  const auto hold = journal_pair_for(make(T::Hold, 4000, f.rm(), f.rm()), at);
  EXPECT_EQ(hold.first.subwallet_id, f.rm_sub().id);
  EXPECT_EQ(hold.first.balance_type, BalanceType::Available);
  EXPECT_EQ(hold.first.amount, Money{-4000});
  EXPECT_EQ(hold.second.subwallet_id, f.rm_sub().id);
  EXPECT_EQ(hold.second.balance_type, BalanceType::Holding);
  EXPECT_EQ(hold.second.amount, Money{4000});

  const auto& dep_txn = make(T::Deposit, 10000, Party::external(), f.rm());
  const auto dep = journal_pair_for(dep_txn, at);
  EXPECT_FALSE(dep.first.wallet_id.has_value());
  EXPECT_EQ(dep.first.balance_type, BalanceType::Internal);
  EXPECT_EQ(dep.first.amount, Money{-10000});
  EXPECT_EQ(dep.second.wallet_id, f.wallets.real_money.id);
  EXPECT_EQ(dep.second.amount, Money{10000});
  EXPECT_EQ(dep.first.entry_id.str(), dep_txn.id.str() + ":1");
  EXPECT_EQ(dep.second.entry_id.str(), dep_txn.id.str() + ":2");

  const auto wd = journal_pair_for(make(T::Withdrawal, 70, f.rm(), Party::external()), at);
  EXPECT_EQ(wd.first.amount, Money{-70});
  EXPECT_EQ(wd.second.balance_type, BalanceType::Internal);

  const auto tr = journal_pair_for(make(T::Transfer, 30, f.rm(), f.ef()), at);
  EXPECT_EQ(tr.first.subwallet_id, f.rm_sub().id);
  EXPECT_EQ(tr.second.subwallet_id, f.ef_sub().id);
  EXPECT_EQ(tr.second.balance_type, BalanceType::Available);

  const auto tfh = journal_pair_for(make(T::TransferFromHold, 25, f.rm(), f.inv(2)), at);
  EXPECT_EQ(tfh.first.balance_type, BalanceType::Holding);
  EXPECT_EQ(tfh.second.subwallet_id, f.inv_sub(2).id);
  EXPECT_EQ(tfh.second.balance_type, BalanceType::Available);
  for (const auto& p : {hold, dep, wd, tr, tfh}) EXPECT_EQ(p.first.amount + p.second.amount, Money{0});
}

TEST_F(TransactionsTest, ExecuteDepositHealthy) {
  auto t = make(T::Deposit, 10000, Party::external(), f.rm());
  const auto r = execute(t, f.system->ledger(), f.system->gateway(), default_epoch());
  ASSERT_TRUE(r);
  EXPECT_EQ(t.attempts, 1);
  EXPECT_EQ(f.system->ledger().size(), 2u);
  EXPECT_EQ(f.system->ledger().scan_balance_of(f.rm_sub().id, BalanceType::Available), Money{10000});
}

TEST_F(TransactionsTest, ExecuteGatewayFailureLeavesLedger) {
  f.system->gateway().configure({1, {}, 0});
  auto t = make(T::Deposit, 10000, Party::external(), f.rm());
  const auto before = f.system->ledger().export_jsonl();
  const auto r = execute(t, f.system->ledger(), f.system->gateway(), default_epoch());
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().kind, ExecutionError::Kind::TransientGatewayError);
  EXPECT_EQ(f.system->ledger().export_jsonl(), before);
}

TEST_F(TransactionsTest, InternalTypesBypassGateway) {
  fund(1000);
  f.system->gateway().configure({0, {1, 1}, 0});
  const auto calls = f.system->gateway().call_log().size();
  auto t = make(T::Hold, 500, f.rm(), f.rm());
  EXPECT_TRUE(execute(t, f.system->ledger(), f.system->gateway(), default_epoch()));
  EXPECT_EQ(f.system->gateway().call_log().size(), calls);
}

TEST(Transition, Examples) {
  Transaction t;
  EXPECT_EQ(transition(t, E::ValidationFailed).value().status, S::Failed);
  t.status = S::TransientError;
  EXPECT_EQ(transition(t, E::ExecutionSucceeded).value().status, S::Completed);
  EXPECT_EQ(transition(t, E::ExecutionFailedTransiently).value().status, S::TransientError);
  EXPECT_EQ(transition(t, E::RetriesExhausted).value().status, S::Failed);
  t.status = S::Processing;
  EXPECT_EQ(transition(t, E::RetriesExhausted).error().kind, StateError::Kind::IllegalTransition);
  for (auto terminal : {S::Completed, S::Failed}) {
    t.status = terminal;
    for (auto e : {E::ValidationFailed, E::ExecutionSucceeded, E::ExecutionFailedTransiently, E::RetriesExhausted}) {
      const auto r = transition(t, e);
      ASSERT_FALSE(r);
      EXPECT_EQ(r.error().kind, StateError::Kind::TerminalState);
    }
  }
}

TEST(Transition, HistoryRecordsEveryAppliedEvent) {
  Transaction t;
  t = transition(t, E::ExecutionFailedTransiently).value();
  t = transition(t, E::ExecutionSucceeded).value();
  EXPECT_EQ(t.history, (std::vector<E>{E::ExecutionFailedTransiently, E::ExecutionSucceeded}));
  EXPECT_TRUE(replay_is_sound(t.history, S::Completed));
  EXPECT_FALSE(replay_is_sound(t.history, S::Failed));
  const std::vector<E> bad{E::ExecutionSucceeded, E::ValidationFailed};
  EXPECT_FALSE(replay_is_sound(bad, S::Failed));
}

TEST_F(TransactionsTest, ProcessValidDeposit) {
  const auto t = f.run(T::Deposit, Money{10000}, Party::external(), f.rm());
  EXPECT_EQ(t.status, S::Completed);
  EXPECT_EQ(t.attempts, 1);
  EXPECT_EQ(f.system->ledger().entries_for_transaction(t.id).size(), 2u);
}

TEST_F(TransactionsTest, ProcessInvalidDepositFails) {
  const auto t = f.run(T::Deposit, Money{10000}, Party::external(), f.inv(0));
  EXPECT_EQ(t.status, S::Failed);
  EXPECT_EQ(t.attempts, 0);
  ASSERT_TRUE(t.last_error);
  EXPECT_EQ(t.last_error->code, "IncompatibleWallet");
  EXPECT_TRUE(f.system->ledger().entries_for_transaction(t.id).empty());
}

TEST_F(TransactionsTest, ProcessExhaustsRetriesIntoTransientError) {
  f.system->gateway().configure({5, {}, 0});
  const auto t = f.run(T::Deposit, Money{10000}, Party::external(), f.rm());
  EXPECT_EQ(t.status, S::TransientError);
  EXPECT_EQ(t.attempts, 3);
  EXPECT_EQ(f.system->ledger().size(), 0u);

  // Two credits left: the next retry fails twice then succeeds.
  const auto again = engine().retry_transaction(t.id, f.system->retry_policy()).value();
  EXPECT_EQ(again.status, S::Completed);
  EXPECT_EQ(again.attempts, 6);
  EXPECT_EQ(f.system->ledger().entries_for_transaction(t.id).size(), 2u);
}

TEST_F(TransactionsTest, RetryRevalidates) {
  fund(100);
  f.system->gateway().configure({3, {}, 0});
  const auto w = f.run(T::Withdrawal, Money{100}, f.rm(), Party::external());
  ASSERT_EQ(w.status, S::TransientError);
  f.system->gateway().configure({});
  ASSERT_EQ(f.run(T::Transfer, Money{50}, f.rm(), f.ef()).status, S::Completed);
  const auto again = engine().retry_transaction(w.id, f.system->retry_policy()).value();
  EXPECT_EQ(again.status, S::Failed);
  EXPECT_EQ(again.last_error->code, "InsufficientFunds");
}

TEST_F(TransactionsTest, TerminalTransactionsAreNotRetryable) {
  const auto t = f.run(T::Deposit, Money{10}, Party::external(), f.rm());
  EXPECT_EQ(engine().retry_transaction(t.id, f.system->retry_policy()).error().kind, EngineError::Kind::NotRetryable);
  EXPECT_EQ(engine().retry_transaction(TransactionId{"nope"}, f.system->retry_policy()).error().kind,
            EngineError::Kind::UnknownTransaction);
  EXPECT_EQ(engine().abandon_transaction(t.id).error().kind, EngineError::Kind::StateError);
}

TEST_F(TransactionsTest, AbandonMovesTransientToFailed) {
  f.system->gateway().configure({3, {}, 0});
  const auto t = f.run(T::Deposit, Money{10}, Party::external(), f.rm());
  const auto gone = engine().abandon_transaction(t.id).value();
  EXPECT_EQ(gone.status, S::Failed);
  EXPECT_EQ(gone.history.back(), E::RetriesExhausted);
}

TEST_F(TransactionsTest, BatchAllSucceed) {
  const auto d = make(T::Deposit, 100, Party::external(), f.rm()).id;
  const auto h = make(T::Hold, 50, f.rm(), f.rm()).id;
  const auto batch = engine().create_batch({d, h}).value();
  const auto done = engine().retry_batch(batch.id, f.system->retry_policy()).value();
  EXPECT_EQ(done.status, BatchStatus::Completed);
  EXPECT_EQ(f.system->ledger().size(), 4u);
  EXPECT_EQ(engine().find(d)->status, S::Completed);
  EXPECT_EQ(engine().find(h)->batch_id, batch.id);
  EXPECT_EQ(f.holding(f.rm_sub()), Money{50});
}

TEST_F(TransactionsTest, BatchFailureRollsBackEverything) {
  fund(500);
  const auto before = f.system->ledger().export_jsonl();
  const auto d = make(T::Deposit, 100, Party::external(), f.rm()).id;
  const auto w = make(T::Withdrawal, 999999, f.rm(), Party::external()).id;
  const auto after_w = make(T::Transfer, 10, f.rm(), f.ef()).id;
  const auto batch = engine().create_batch({d, w, after_w}).value();
  const auto calls_before = f.system->gateway().call_log().size();
  const auto done = engine().retry_batch(batch.id, f.system->retry_policy()).value();
  EXPECT_EQ(done.status, BatchStatus::Failed);
  EXPECT_EQ(f.system->ledger().export_jsonl(), before);
  EXPECT_EQ(engine().find(w)->status, S::Failed);
  EXPECT_EQ(engine().find(d)->status, S::Processing);
  EXPECT_EQ(engine().find(after_w)->status, S::Processing);
  // The deposit's bank transfer was reversed.
  const auto& log = f.system->gateway().call_log();
  ASSERT_EQ(log.size(), calls_before + 2);
  EXPECT_EQ(log.back().kind, GatewayCall::Kind::Compensation);
  EXPECT_EQ(log.back().request_id, d);
}

TEST_F(TransactionsTest, EmptyBatchCompletes) {
  const auto batch = engine().create_batch({}).value();
  EXPECT_EQ(engine().retry_batch(batch.id, f.system->retry_policy()).value().status, BatchStatus::Completed);
  EXPECT_EQ(f.system->ledger().size(), 0u);
}

TEST_F(TransactionsTest, TransientBatchCanBeRetriedLater) {
  const auto h0 = make(T::Hold, 10, f.rm(), f.rm()).id;
  const auto d = make(T::Deposit, 100, Party::external(), f.rm()).id;
  const auto h1 = make(T::Hold, 60, f.rm(), f.rm()).id;
  const auto batch = engine().create_batch({d, h1}).value();
  f.system->gateway().configure({3, {}, 0});
  EXPECT_EQ(engine().retry_batch(batch.id, f.system->retry_policy()).value().status, BatchStatus::Failed);
  EXPECT_EQ(engine().find(d)->status, S::TransientError);
  EXPECT_EQ(f.system->ledger().size(), 0u);
  EXPECT_EQ(engine().retry_transaction(d, f.system->retry_policy()).error().kind, EngineError::Kind::BatchMember);
  const auto done = engine().retry_batch(batch.id, f.system->retry_policy()).value();
  EXPECT_EQ(done.status, BatchStatus::Completed);
  EXPECT_EQ(f.available(f.rm_sub()), Money{40});
  // A completed batch is returned unchanged on re-entry.
  EXPECT_EQ(engine().retry_batch(batch.id, f.system->retry_policy()).value(), done);
  EXPECT_EQ(engine().find(h0)->status, S::Processing);
}

TEST_F(TransactionsTest, BatchMembershipRules) {
  const auto d = make(T::Deposit, 100, Party::external(), f.rm()).id;
  ASSERT_TRUE(engine().create_batch({d}));
  EXPECT_EQ(engine().create_batch({d}).error().kind, EngineError::Kind::AlreadyInBatch);
  EXPECT_EQ(engine().create_batch({TransactionId{"x"}}).error().kind, EngineError::Kind::UnknownTransaction);
  EXPECT_EQ(engine().retry_batch(BatchId{"nope"}, f.system->retry_policy()).error().kind, EngineError::Kind::UnknownBatch);
}

// Exactly-once: Completed iff a pair is in the ledger, under random faults.
TEST_F(TransactionsTest, ExactlyOnceUnderRandomFaults) {
  std::mt19937_64 rng{11};
  f.system->gateway().configure({0, *FaultProbability::parse("0.4"), 5});
  for (int i = 0; i < 300; ++i) {
    const auto amount = Money{static_cast<std::int64_t>(rng() % 500 + 1)};
    switch (rng() % 4) {
      case 0:
      case 1:
        f.run(T::Deposit, amount, Party::external(), f.rm());
        break;
      case 2:
        f.run(T::Withdrawal, amount, f.rm(), Party::external());
        break;
      default:
        for (const auto& t : engine().transactions()) {
          if (t.status == S::TransientError) {
            (void)engine().retry_transaction(t.id, f.system->retry_policy());
            break;
          }
        }
    }
  }
  for (const auto& t : engine().transactions()) {
    const auto n = f.system->ledger().entries_for_transaction(t.id).size();
    EXPECT_EQ(n, t.status == S::Completed ? 2u : 0u) << t.id.str();
    EXPECT_TRUE(replay_is_sound(t.history, t.status));
  }
}

}  // namespace
}  // namespace dwallet
