// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dwallet/persistence.hpp"
#include "dwallet/simulation.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace {

using namespace dwallet;
using dwallet::testing::Fixture;
using dwallet::testing::TempDir;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Check {
  std::string failures;
  std::uint64_t count = 0;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++count <= 3) failures += (failures.empty() ? "" : "; ") + what;
  }
};

double elapsed_s(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string seconds(double s) {
  std::ostringstream out;
  out.precision(3);
  out << std::fixed << s << " s";
  return out.str();
}

Verdict finish(const Check& c, const std::string& summary, double secs, double limit) {
  Verdict v;
  v.pass = c.count == 0 && (limit <= 0 || secs < limit);
  v.detail = summary + ", " + std::to_string(c.count) + " violations, " + seconds(secs);
  if (limit > 0) v.detail += " (limit " + seconds(limit) + ")";
  if (!c.failures.empty()) v.detail += " [" + c.failures + "]";
  return v;
}

// --- 1: validation matrix -------------------------------------------------

struct PartySpec {
  std::string name;
  Party party;
  bool external = false;
  std::string customer;
  WalletType type = WalletType::RealMoney;
  std::string subwallet;
};

// The compatibility matrix, written out independently of the engine.
bool matrix_accepts(TransactionType t, const PartySpec& o, const PartySpec& d) {
  const bool same_customer = !o.external && !d.external && o.customer == d.customer;
  const auto is = [](const PartySpec& p, WalletType w) { return !p.external && p.type == w; };
  switch (t) {
    case TransactionType::Deposit:
      return o.external && is(d, WalletType::RealMoney);
    case TransactionType::Withdrawal:
      return is(o, WalletType::RealMoney) && d.external;
    case TransactionType::Transfer:
      return same_customer && ((is(o, WalletType::RealMoney) && is(d, WalletType::EmergencyFunds)) ||
                               (is(o, WalletType::EmergencyFunds) && is(d, WalletType::RealMoney)));
    case TransactionType::Hold:
      return !o.external && !d.external && o.subwallet == d.subwallet &&
             (o.type == WalletType::RealMoney || o.type == WalletType::Investment);
    case TransactionType::TransferFromHold:
      return same_customer && ((is(o, WalletType::RealMoney) && is(d, WalletType::Investment)) ||
                               (is(o, WalletType::Investment) && is(d, WalletType::RealMoney)));
  }
  return false;
}

Verdict ac1_validation_matrix() {
  const auto start = Clock::now();
  Fixture f;
  auto& sys = *f.system;
  const auto bob = sys.wallet_store().create_customer_wallets(CustomerId{"bob"}, {"stocks", "bonds"}).value();

  std::vector<PartySpec> parties{{"external", Party::external(), true, "", WalletType::RealMoney, ""}};
  const auto add = [&](const std::string& customer, const Wallet& w) {
    for (const auto& s : w.subwallets) {
      parties.push_back({customer + "/" + s.name, Party::of(w, s), false, customer, w.wallet_type, s.id.str()});
    }
  };
  for (const auto* w : {&f.wallets.real_money, &f.wallets.emergency_funds, &f.wallets.investment}) add("alice", *w);
  for (const auto* w : {&bob.real_money, &bob.emergency_funds, &bob.investment}) add("bob", *w);

  Check c;
  std::uint64_t cases = 0;
  const auto run_pass = [&](bool funded) {
    for (auto type : kAllTransactionTypes) {
      for (const auto& o : parties) {
        for (const auto& d : parties) {
          ++cases;
          Transaction t;
          t.id = TransactionId{"probe"};
          t.txn_type = type;
          t.amount = Money{100};
          t.originator = o.party;
          t.beneficiary = d.party;
          const auto verdict = validate(t, sys.wallet_store(), sys.ledger());
          const bool expected_route = matrix_accepts(type, o, d);
          const bool expected = expected_route && (funded || type == TransactionType::Deposit);
          const std::string label = std::string(to_string(type)) + " " + o.name + "->" + d.name;
          c.expect(verdict.is_valid() == expected, label + (funded ? " funded" : " unfunded"));
          if (expected_route && !expected) {
            c.expect(!verdict.is_valid() && verdict.reason() == InvalidReason::InsufficientFunds,
                     label + " should fail the balance check");
          }
        }
      }
    }
  };
  run_pass(false);

  // Fund every subwallet's available and holding balance.
  int n = 0;
  for (const auto& p : parties) {
    if (p.external) continue;
    for (auto bt : {BalanceType::Available, BalanceType::Holding}) {
      const auto* ref = p.party.wallet_ref();
      const std::string id = "fund" + std::to_string(++n);
      JournalEntry from{EntryId{id + ":1"}, TransactionId{id}, std::nullopt, std::nullopt, Money{-1000000},
                        BalanceType::Internal, 0, default_epoch()};
      JournalEntry to{EntryId{id + ":2"}, TransactionId{id}, ref->wallet_id, ref->subwallet_id, Money{1000000}, bt, 0,
                      default_epoch()};
      c.expect(sys.ledger().post_pair({from, to}).ok(), "funding pair rejected");
    }
  }
  run_pass(true);
  return finish(c, std::to_string(cases) + " cases over " + std::to_string(parties.size()) + " parties", elapsed_s(start),
                1.0);
}

// --- 2 and 3: simulated workloads -----------------------------------------

struct Workload {
  std::vector<std::unique_ptr<Simulation>> sims;
  std::vector<SimulationReport> reports;
  double seconds = 0;
};

Workload& workloads() {
  static Workload w = [] {
    Workload out;
    const auto start = Clock::now();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      out.sims.push_back(std::make_unique<Simulation>(SimulationConfig{seed, 10000, 4, FaultProbability::parse("0.2")}));
      out.reports.push_back(out.sims.back()->run());
    }
    out.seconds = elapsed_s(start);
    return out;
  }();
  return w;
}

const InvariantResult* invariant(const SimulationReport& r, const std::string& name) {
  for (const auto& i : r.invariants) {
    if (i.name == name) return &i;
  }
  return nullptr;
}

Verdict ac2_double_entry() {
  auto& w = workloads();
  Check c;
  std::uint64_t checks = 0;
  std::uint64_t entries = 0;
  for (std::size_t k = 0; k < w.sims.size(); ++k) {
    const auto& report = w.reports[k];
    c.expect(report.ops >= 10000, "fewer than 10000 ops");
    for (const char* name : {"ledger_zero_sum", "entry_pairing", "customer_funds_conservation", "exactly_once_ledger_effect"}) {
      const auto* inv = invariant(report, name);
      c.expect(inv && inv->checks > 0, std::string(name) + " not checked");
      if (inv) {
        checks += inv->checks;
        for (std::uint64_t i = 0; i < inv->violations; ++i) c.expect(false, std::string(name) + " violated");
      }
    }
    // Independent pass over the final ledger.
    const auto& sys = w.sims[k]->system();
    std::int64_t total = 0;
    std::map<TransactionId, std::vector<std::int64_t>> by_txn;
    for (const auto& e : sys.ledger().entries()) {
      total += e.amount.minor_units();
      by_txn[e.transaction_id].push_back(e.amount.minor_units());
      ++entries;
    }
    c.expect(total == 0, "ledger sum is " + std::to_string(total));
    for (const auto& [id, amounts] : by_txn) {
      c.expect(amounts.size() == 2 && amounts[0] + amounts[1] == 0, id.str() + " is not a balanced pair");
    }
    for (const auto& t : sys.engine().transactions()) {
      const auto it = by_txn.find(t.id);
      const std::size_t n = it == by_txn.end() ? 0 : it->second.size();
      c.expect(n == 0 || n == 2, t.id.str() + " has " + std::to_string(n) + " entries");
    }
  }
  return finish(c,
                std::to_string(w.sims.size()) + " seeds x 10000 ops, " + std::to_string(checks) + " checks, " +
                    std::to_string(entries) + " entries",
                w.seconds, 30.0);
}

Verdict ac3_non_negative() {
  auto& w = workloads();
  Check c;
  std::uint64_t commit_points = 0;
  for (std::size_t k = 0; k < w.sims.size(); ++k) {
    const auto* inv = invariant(w.reports[k], "non_negative_balances");
    c.expect(inv && inv->checks > 0, "non_negative_balances not checked");
    if (inv) {
      for (std::uint64_t i = 0; i < inv->violations; ++i) c.expect(false, "non_negative_balances violated");
    }
    // Replay the ledger pair by pair; every pair boundary is a commit point.
    std::map<std::pair<std::string, BalanceType>, std::int64_t> running;
    const auto entries = w.sims[k]->system().ledger().entries();
    for (std::size_t i = 0; i + 1 < entries.size(); i += 2) {
      for (const auto* e : {&entries[i], &entries[i + 1]}) {
        if (e->subwallet_id) running[{e->subwallet_id->str(), e->balance_type}] += e->amount.minor_units();
      }
      ++commit_points;
      for (const auto* e : {&entries[i], &entries[i + 1]}) {
        if (!e->subwallet_id) continue;
        const auto v = running[{e->subwallet_id->str(), e->balance_type}];
        c.expect(v >= 0, e->subwallet_id->str() + " negative after seq " + std::to_string(e->seq));
      }
    }
  }
  return finish(c, std::to_string(commit_points) + " replayed commit points", w.seconds, 30.0);
}

// --- 4: retry law ----------------------------------------------------------

Verdict ac4_retry_law() {
  const auto start = Clock::now();
  Check c;
  int cases = 0;
  for (int k = 0; k <= 5; ++k) {
    for (int n = 1; n <= 5; ++n) {
      ++cases;
      SystemConfig cfg;
      cfg.faults.fail_next_k = static_cast<std::uint64_t>(k);
      cfg.retry_policy = *RetryPolicy::with_max_attempts(n);
      Fixture f{cfg};
      const auto t = f.run(TransactionType::Deposit, Money{100}, Party::external(), f.rm());
      const std::string at = "k=" + std::to_string(k) + ",n=" + std::to_string(n);
      c.expect((t.status == TransactionStatus::Completed) == (k < n), at + " status " + std::string(to_string(t.status)));
      c.expect(t.attempts == std::min(k + 1, n), at + " attempts " + std::to_string(t.attempts));
      c.expect(f.system->gateway().call_log().size() == static_cast<std::size_t>(std::min(k + 1, n)), at + " gateway calls");
      c.expect(f.system->ledger().size() == (k < n ? 2u : 0u), at + " ledger entries");
    }
  }
  return finish(c, std::to_string(cases) + " (k, n) cells", elapsed_s(start), 1.0);
}

// --- 5: batch atomicity ----------------------------------------------------

Verdict ac5_batch_atomicity() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 rng{2024};
  Fixture f;
  auto& sys = *f.system;
  auto& engine = sys.engine();
  c.expect(f.run(TransactionType::Deposit, Money{1'000'000'000}, Party::external(), f.rm()).status ==
               TransactionStatus::Completed,
           "funding deposit");
  c.expect(f.run(TransactionType::Transfer, Money{1'000'000}, f.rm(), f.ef()).status == TransactionStatus::Completed,
           "funding transfer");

  const auto valid_member = [&]() -> TransactionId {
    const Money amount{static_cast<std::int64_t>(rng() % 1000 + 1)};
    switch (rng() % 5) {
      case 0:
        return engine.create_transaction(TransactionType::Deposit, amount, Party::external(), f.rm()).id;
      case 1:
        return engine.create_transaction(TransactionType::Withdrawal, amount, f.rm(), Party::external()).id;
      case 2:
        return engine.create_transaction(TransactionType::Transfer, amount, f.rm(), f.ef()).id;
      case 3:
        return engine.create_transaction(TransactionType::Hold, amount, f.rm(), f.rm()).id;
      default:
        return engine.create_transaction(TransactionType::Transfer, amount, f.ef(), f.rm()).id;
    }
  };
  const auto poison_member = [&]() -> TransactionId {
    switch (rng() % 4) {
      case 0:
        return engine.create_transaction(TransactionType::Withdrawal, Money{999'999'999'999}, f.rm(), Party::external()).id;
      case 1:
        return engine.create_transaction(TransactionType::Deposit, Money{100}, Party::external(), f.inv(0)).id;
      case 2:
        return engine.create_transaction(TransactionType::Transfer, Money{0}, f.rm(), f.ef()).id;
      default:
        return engine.create_transaction(TransactionType::Hold, Money{100}, f.ef(), f.ef()).id;
    }
  };

  int failed_cases = 0;
  for (int i = 0; i < 1200; ++i) {
    const bool poison = i % 6 != 5;  // every sixth batch succeeds, growing the ledger
    const std::size_t size = rng() % 8 + 1;
    const std::size_t bad_at = rng() % size;
    std::vector<TransactionId> members;
    for (std::size_t m = 0; m < size; ++m) members.push_back(poison && m == bad_at ? poison_member() : valid_member());

    const auto before = sys.ledger().export_jsonl();
    const auto calls_before = sys.gateway().call_log().size();
    const auto batch = engine.create_batch(members).value();
    const auto done = engine.retry_batch(batch.id, sys.retry_policy()).value();
    const auto after = sys.ledger().export_jsonl();
    if (poison) {
      ++failed_cases;
      c.expect(done.status == BatchStatus::Failed, "poisoned batch " + batch.id.str() + " did not fail");
      c.expect(after == before, "ledger export changed after failed " + batch.id.str());
      for (const auto& id : members) {
        c.expect(engine.find(id)->status != TransactionStatus::Completed, id.str() + " completed in a failed batch");
      }
      // Every bank transfer made during the attempt was compensated.
      std::map<TransactionId, int> open;
      const auto& log = sys.gateway().call_log();
      for (std::size_t j = calls_before; j < log.size(); ++j) {
        if (log[j].kind == GatewayCall::Kind::Transfer && log[j].succeeded) ++open[log[j].request_id];
        if (log[j].kind == GatewayCall::Kind::Compensation) --open[log[j].request_id];
      }
      for (const auto& [id, n] : open) c.expect(n == 0, id.str() + " left an uncompensated transfer");
    } else {
      c.expect(done.status == BatchStatus::Completed, "clean batch " + batch.id.str() + " failed");
      c.expect(after.size() > before.size() && after.compare(0, before.size(), before) == 0,
               "clean batch did not append");
    }
  }
  return finish(c, std::to_string(failed_cases) + " failed batches, " + std::to_string(1200 - failed_cases) + " clean",
                elapsed_s(start), 0);
}

// --- 6: allocation exactness -----------------------------------------------

Verdict ac6_allocation() {
  const auto start = Clock::now();
  Check c;
  std::mt19937_64 rng{606};
  std::vector<SubwalletId> ids;
  for (int i = 0; i < 10; ++i) ids.emplace_back("sw-" + std::to_string(100 + i));
  const int cases = 12000;
  for (int i = 0; i < cases; ++i) {
    std::vector<SubwalletId> pick(ids.begin(), ids.begin() + static_cast<long>(rng() % ids.size() + 1));
    std::shuffle(pick.begin(), pick.end(), rng);
    const InvestmentPolicy policy{CustomerId{"c"}, dwallet::testing::random_policy(rng, pick)};
    std::int64_t raw = 0;
    switch (rng() % 3) {
      case 0:
        raw = static_cast<std::int64_t>(rng() % 100 + 1);
        break;
      case 1:
        raw = static_cast<std::int64_t>(rng() % 100'000'000 + 1);
        break;
      default:
        raw = static_cast<std::int64_t>(rng() >> 1) | 1;
    }
    const Money amount{raw};
    const auto got = allocate(amount, policy);
    if (!got) {
      c.expect(false, "allocate rejected a valid policy");
      continue;
    }
    boost::multiprecision::cpp_int sum = 0;
    for (const auto& [id, m] : got.value()) {
      sum += m.minor_units();
      const auto bp = policy.allocations.at(id);
      c.expect(bp != 0, "zero-bp bucket " + id.str() + " received funds");
      const auto diff = dwallet::testing::Rational(m.minor_units()) - dwallet::testing::exact_share(amount, bp);
      c.expect(diff < 1 && diff > -1, "bucket " + id.str() + " off by a unit or more");
    }
    c.expect(sum == raw, "sum mismatch for amount " + std::to_string(raw));
    std::map<SubwalletId, std::int64_t> as_int;
    for (const auto& [id, m] : got.value()) as_int[id] = m.minor_units();
    c.expect(as_int == dwallet::testing::allocate_oracle(amount, policy.allocations),
             "differs from largest-remainder oracle at amount " + std::to_string(raw));
  }
  return finish(c, std::to_string(cases) + " random (amount, policy) pairs", elapsed_s(start), 5.0);
}

// --- 7: worked example -----------------------------------------------------

Verdict ac7_worked_example() {
  const auto start = Clock::now();
  Check c;
  Fixture f;
  auto& sys = *f.system;
  const auto show = [](Money m) { return m.to_decimal_string(); };
  const auto buckets = [&] {
    std::vector<std::string> out;
    for (const auto& s : f.wallets.investment.subwallets) out.push_back(show(f.available(s)));
    return out;
  };

  sys.clock().set(*parse_timestamp("2025-01-03"));  // a Friday
  c.expect(sys.investments().set_policy(f.alice, f.policy({5000, 3000, 1500, 500})).ok(), "policy rejected");
  c.expect(sys.wallet_service().deposit(f.alice, *Money::parse_decimal("100.00")).value().status ==
               TransactionStatus::Completed,
           "deposit");
  c.expect(sys.investments().invest(f.alice, *Money::parse_decimal("100.00")).ok(), "invest");
  c.expect(show(f.available(f.rm_sub())) == "0.00", "RM available before settlement " + show(f.available(f.rm_sub())));
  c.expect(show(f.holding(f.rm_sub())) == "100.00", "RM holding before settlement " + show(f.holding(f.rm_sub())));
  c.expect(sys.investments().settle(*parse_date("2025-01-03")).empty(), "settled on the same day");

  const auto monday = *parse_date("2025-01-06");
  c.expect(next_business_day(*parse_date("2025-01-03"), sys.investments().calendar()) == monday, "next business day");
  sys.clock().set(std::chrono::sys_days{monday});
  const auto first = sys.investments().settle(monday);
  c.expect(first.size() == 1 && first.front().settled, "investment did not settle on Monday");
  c.expect(buckets() == std::vector<std::string>{"50.00", "30.00", "15.00", "5.00"}, "investment buckets");
  c.expect(show(f.holding(f.rm_sub())) == "0.00", "RM holding after settlement");

  c.expect(sys.investments().liquidate(f.alice, *Money::parse_decimal("20.00")).ok(), "liquidate");
  const auto tuesday = next_business_day(monday, sys.investments().calendar());
  sys.clock().set(std::chrono::sys_days{tuesday});
  const auto second = sys.investments().settle(tuesday);
  c.expect(second.size() == 1 && second.front().settled, "liquidation did not settle");
  c.expect(show(f.available(f.rm_sub())) == "20.00", "RM available after liquidation " + show(f.available(f.rm_sub())));
  const auto summary = sys.wallet_service().summary(f.alice).value();
  c.expect(show(summary.of(WalletType::Investment).available) == "80.00", "investment total");
  c.expect(buckets() == std::vector<std::string>{"40.00", "24.00", "12.00", "4.00"}, "post-liquidation buckets");

  // The post-liquidation buckets equal the invested split minus the oracle's split of 20.00.
  const auto liquidated = dwallet::testing::allocate_oracle(Money{2000}, f.policy({5000, 3000, 1500, 500}));
  const std::int64_t invested[] = {5000, 3000, 1500, 500};
  for (std::size_t i = 0; i < 4; ++i) {
    c.expect(f.available(f.inv_sub(i)).minor_units() == invested[i] - liquidated.at(f.inv_sub(i).id),
             "bucket " + std::to_string(i) + " disagrees with the allocation oracle");
  }
  return finish(c, "invest 100.00 at 50/30/15/5, liquidate 20.00", elapsed_s(start), 1.0);
}

// --- 8: state machine -------------------------------------------------------

Verdict ac8_state_machine() {
  const auto start = Clock::now();
  using S = TransactionStatus;
  using E = TransactionEvent;
  const E events[] = {E::ValidationFailed, E::ExecutionSucceeded, E::ExecutionFailedTransiently, E::RetriesExhausted};
  // Allowed edges, written out independently.
  const std::map<std::pair<S, E>, S> edges{
      {{S::Processing, E::ValidationFailed}, S::Failed},
      {{S::Processing, E::ExecutionSucceeded}, S::Completed},
      {{S::Processing, E::ExecutionFailedTransiently}, S::TransientError},
      {{S::TransientError, E::ExecutionSucceeded}, S::Completed},
      {{S::TransientError, E::ExecutionFailedTransiently}, S::TransientError},
      {{S::TransientError, E::RetriesExhausted}, S::Failed},
      {{S::TransientError, E::ValidationFailed}, S::Failed},
  };

  Check c;
  std::mt19937_64 rng{808};
  const int sequences = 100000;
  for (int i = 0; i < sequences; ++i) {
    Transaction t;
    const std::size_t len = rng() % 12 + 1;
    for (std::size_t j = 0; j < len; ++j) {
      const E e = events[rng() % 4];
      const auto r = transition(t, e);
      const auto edge = edges.find({t.status, e});
      if (is_terminal(t.status)) {
        c.expect(!r.ok(), "left a terminal state");
        continue;
      }
      c.expect(r.ok() == (edge != edges.end()), "edge mismatch");
      if (r.ok()) {
        c.expect(edge != edges.end() && r.value().status == edge->second, "wrong target state");
        t = r.value();
      }
    }
    if (t.status == S::Completed) {
      c.expect(std::find(t.history.begin(), t.history.end(), E::ExecutionSucceeded) != t.history.end(),
               "completed without a successful execution");
    }
    c.expect(replay_is_sound(t.history, t.status), "history does not replay");
  }
  // Histories written by the engine under the simulated workloads.
  std::uint64_t engine_txns = 0;
  for (const auto& sim : workloads().sims) {
    for (const auto& t : sim->system().engine().transactions()) {
      ++engine_txns;
      c.expect(replay_is_sound(t.history, t.status), t.id.str() + " history unsound");
      if (t.status == S::Completed) {
        c.expect(std::find(t.history.begin(), t.history.end(), E::ExecutionSucceeded) != t.history.end(),
                 t.id.str() + " completed without ExecutionSucceeded");
      }
    }
  }
  return finish(c,
                std::to_string(sequences) + " random sequences, " + std::to_string(engine_txns) +
                    " engine histories",
                elapsed_s(start), 0);
}

// --- 9: balance oracle -----------------------------------------------------

Verdict ac9_balance_oracle() {
  const auto start = Clock::now();
  Check c;
  Fixture f;
  auto& sys = *f.system;
  std::vector<Wallet> wallets = {f.wallets.real_money, f.wallets.emergency_funds, f.wallets.investment};
  for (const char* name : {"bob", "carol"}) {
    const auto w = sys.wallet_store().create_customer_wallets(CustomerId{name}, {"a", "b", "c"}).value();
    wallets.insert(wallets.end(), {w.real_money, w.emergency_funds, w.investment});
  }
  std::vector<const Subwallet*> subs;
  for (const auto& w : wallets) {
    for (const auto& s : w.subwallets) subs.push_back(&s);
  }

  std::mt19937_64 rng{909};
  int committed = 0;
  int attempts = 0;
  while (committed < 10000) {
    ++attempts;
    const std::string id = "p" + std::to_string(attempts);
    const auto* to = subs[rng() % subs.size()];
    const auto* from = subs[rng() % subs.size()];
    const auto amount = static_cast<std::int64_t>(rng() % 10000 + 1);
    const auto bt = [&] { return rng() % 2 ? BalanceType::Available : BalanceType::Holding; };
    JournalEntry a{EntryId{id + ":1"}, TransactionId{id}, std::nullopt, std::nullopt, Money{-amount},
                   BalanceType::Internal, 0, default_epoch()};
    if (rng() % 4 != 0) {
      a.wallet_id = from->wallet_id;
      a.subwallet_id = from->id;
      a.balance_type = bt();
    }
    JournalEntry b{EntryId{id + ":2"}, TransactionId{id}, to->wallet_id, to->id, Money{amount}, bt(), 0,
                   default_epoch()};
    if (sys.ledger().post_pair({a, b})) ++committed;
  }

  // Full-scan summation per (wallet, balance type), independent of the ledger.
  std::map<std::pair<std::string, BalanceType>, std::int64_t> scan;
  for (const auto& e : sys.ledger().entries()) {
    if (e.wallet_id) scan[{e.wallet_id->str(), e.balance_type}] += e.amount.minor_units();
  }
  int compared = 0;
  for (const auto& w : wallets) {
    const auto avail = sys.ledger().available_balance(w.id);
    const auto hold = sys.ledger().holding_balance(w.id);
    c.expect(avail && avail->minor_units() == scan[{w.id.str(), BalanceType::Available}], w.id.str() + " available");
    c.expect(hold && hold->minor_units() == scan[{w.id.str(), BalanceType::Holding}], w.id.str() + " holding");
    compared += 2;
    for (const auto& s : w.subwallets) {
      for (auto t : {BalanceType::Available, BalanceType::Holding}) {
        c.expect(sys.ledger().balance_of(s.id, t).value() == sys.ledger().scan_balance_of(s.id, t),
                 s.id.str() + " cached vs scan");
        ++compared;
      }
    }
  }
  return finish(c, std::to_string(committed) + " committed pairs, " + std::to_string(compared) + " balances compared",
                elapsed_s(start), 5.0);
}

// --- 10: persistence across processes ---------------------------------------

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DWALLET_CLI_PATH + "\" " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Verdict ac10_persistence() {
  const auto start = Clock::now();
  Check c;
  int states = 0;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    Simulation sim({seed, 3000, 4, FaultProbability::parse("0.3")});
    c.expect(sim.run().total_violations() == 0, "simulation violations");
    const auto& sys = sim.system();
    TempDir dir("acceptance-" + std::to_string(seed));
    TempDir copy("acceptance-copy-" + std::to_string(seed));
    c.expect(export_state(sys, dir.path()).ok(), "export failed");
    ++states;
    const std::string state = "--state-dir \"" + dir.path().string() + "\" ";

    const auto dump = run_cli(state + "ledger dump");
    c.expect(dump.first == 0, "ledger dump exit " + std::to_string(dump.first));
    c.expect(dump.second == sys.ledger().export_jsonl(), "ledger dump differs for seed " + std::to_string(seed));

    const auto balance = run_cli(state + "--json balance --all");
    c.expect(balance.first == 0, "balance exit " + std::to_string(balance.first));
    const auto report = nlohmann::json::parse(balance.second, nullptr, false);
    c.expect(report.is_array() && report.size() == sys.wallet_store().customers().size(), "balance report shape");
    if (report.is_array()) {
      for (const auto& customer : report) {
        const auto summary = sys.wallet_service().summary(CustomerId{customer["customer"].get<std::string>()});
        c.expect(summary.ok(), "unknown customer in report");
        if (!summary) continue;
        for (const auto& w : customer["wallets"]) {
          const auto type = *parse_wallet_type(w["wallet_type"].get<std::string>());
          const auto& expected = summary->of(type);
          c.expect(w["wallet_id"] == expected.id.str(), "wallet id");
          c.expect(w["available"] == expected.available.to_decimal_string(), "available of " + expected.id.str());
          c.expect(w["holding"] == expected.holding.to_decimal_string(), "holding of " + expected.id.str());
          for (std::size_t i = 0; i < expected.subwallets.size(); ++i) {
            const auto& sub = w["subwallets"][i];
            c.expect(sub["id"] == expected.subwallets[i].id.str(), "subwallet order");
            c.expect(sub["available"] == expected.subwallets[i].available.to_decimal_string(), "subwallet available");
            c.expect(sub["holding"] == expected.subwallets[i].holding.to_decimal_string(), "subwallet holding");
          }
        }
      }
    }

    // A second hop: import into another directory in a fresh process.
    const std::string other = "--state-dir \"" + copy.path().string() + "\" ";
    c.expect(run_cli(other + "state import --dir \"" + dir.path().string() + "\"").first == 0, "state import");
    c.expect(run_cli(other + "ledger dump").second == dump.second, "ledger differs after import");
    c.expect(run_cli(other + "--json balance --all").second == balance.second, "balances differ after import");
  }
  return finish(c, std::to_string(states) + " simulated states through fresh processes", elapsed_s(start), 0);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 validation matrix equivalence", ac1_validation_matrix},
      {"AC2 double entry and conservation", ac2_double_entry},
      {"AC3 non-negative balances", ac3_non_negative},
      {"AC4 retry law", ac4_retry_law},
      {"AC5 batch atomicity", ac5_batch_atomicity},
      {"AC6 allocation exactness", ac6_allocation},
      {"AC7 worked example", ac7_worked_example},
      {"AC8 state machine soundness", ac8_state_machine},
      {"AC9 balance oracle equivalence", ac9_balance_oracle},
      {"AC10 persistence round trip", ac10_persistence},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    failed += v.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
