#include "dwallet/simulation.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dwallet {

namespace chr = std::chrono;

std::uint64_t SimulationReport::total_violations() const {
  std::uint64_t n = 0;
  for (const auto& inv : invariants) n += inv.violations;
  return n;
}

std::string SimulationReport::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["ops"] = ops;
  j["attempted"] = attempted;
  j["completed"] = completed;
  j["failed"] = failed;
  j["transient"] = transient;
  j["per_operation"] = per_operation;
  auto& inv = j["invariants"] = nlohmann::ordered_json::array();
  for (const auto& r : invariants) {
    inv.push_back({{"name", r.name}, {"checks", r.checks}, {"violations", r.violations}, {"samples", r.samples}});
  }
  j["total_violations"] = total_violations();
  j["ledger_entries"] = ledger_entries;
  j["final_balances"] = final_balances;
  return j.dump(2);
}

std::string SimulationReport::to_text() const {
  std::ostringstream out;
  out << "seed " << seed << ", ops " << ops << "\n";
  out << "requests: attempted " << attempted << ", completed " << completed << ", failed " << failed
      << ", transient " << transient << "\n";
  for (const auto& [op, n] : per_operation) out << "  " << op << ": " << n << "\n";
  out << "invariants:\n";
  for (const auto& r : invariants) {
    out << "  " << r.name << ": " << r.violations << " violations in " << r.checks << " checks\n";
    for (const auto& s : r.samples) out << "    " << s << "\n";
  }
  out << "ledger entries: " << ledger_entries << "\n";
  out << "total violations: " << total_violations() << "\n";
  return out.str();
}

namespace {

constexpr const char* kOptionPool[] = {"stocks", "realEstate", "bonds", "crypto", "gold", "cash"};
constexpr std::size_t kMaxSamples = 5;

enum class Op {
  Deposit,
  Withdraw,
  EmergencyAllocate,
  EmergencyRelease,
  Invest,
  Liquidate,
  SettleTick,
  GatewayReconfigure,
  RetryTransient,
  AbandonTransient,
  PolicyChange,
  MixedBatch,
};

struct OpWeight {
  Op op;
  const char* name;
  std::uint64_t weight;
};

constexpr OpWeight kOps[] = {
    {Op::Deposit, "deposit", 20},
    {Op::Withdraw, "withdraw", 9},
    {Op::EmergencyAllocate, "emergency_allocate", 9},
    {Op::EmergencyRelease, "emergency_release", 7},
    {Op::Invest, "invest", 14},
    {Op::Liquidate, "liquidate", 8},
    {Op::SettleTick, "settle", 8},
    {Op::GatewayReconfigure, "gateway_reconfigure", 4},
    {Op::RetryTransient, "retry", 9},
    {Op::AbandonTransient, "abandon", 2},
    {Op::PolicyChange, "policy_change", 4},
    {Op::MixedBatch, "batch", 6},
};

}  // namespace

struct Simulation::Impl {
  enum class Verdict { Completed, Failed, Transient };

  Impl(const SimulationConfig& c, WalletSystem& s) : config(c), system(s), rng(c.seed) {}

  const SimulationConfig& config;
  WalletSystem& system;
  std::mt19937_64 rng;
  SimulationReport report;
  std::vector<CustomerId> customers;

  // Incremental checking state.
  std::size_t checked_entries = 0;
  std::set<TransactionId> posted;
  std::vector<TransactionStatus> seen_status;
  std::vector<std::size_t> seen_history;
  std::map<CustomerId, Money> external_net;

  InvariantResult zero_sum{"ledger_zero_sum", 0, 0, {}};
  InvariantResult pairing{"entry_pairing", 0, 0, {}};
  InvariantResult non_negative{"non_negative_balances", 0, 0, {}};
  InvariantResult conservation{"customer_funds_conservation", 0, 0, {}};
  InvariantResult state_machine{"state_machine_soundness", 0, 0, {}};
  InvariantResult exactly_once{"exactly_once_ledger_effect", 0, 0, {}};
  InvariantResult oracle{"balance_oracle_equivalence", 0, 0, {}};

  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift keeps this independent of the standard library's
    // distribution implementations.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
  }
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  static void violate(InvariantResult& r, std::string what) {
    ++r.violations;
    if (r.samples.size() < kMaxSamples) r.samples.push_back(std::move(what));
  }

  const CustomerId& any_customer() { return customers[below(customers.size())]; }

  Money random_amount(Money hint) {
    // Mostly within what is available, sometimes beyond it.
    const std::int64_t cap = std::max<std::int64_t>(hint.minor_units(), 100);
    const std::int64_t top = chance(1, 8) ? cap * 2 : cap;
    return Money{1 + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(top)))};
  }

  std::map<SubwalletId, int> random_allocation(const Wallet& investment) {
    std::vector<int> cuts{0, kFullAllocationBp};
    for (std::size_t i = 1; i < investment.subwallets.size(); ++i) {
      cuts.push_back(static_cast<int>(below(kFullAllocationBp + 1)));
    }
    std::sort(cuts.begin(), cuts.end());
    std::map<SubwalletId, int> out;
    for (std::size_t i = 0; i < investment.subwallets.size(); ++i) {
      out[investment.subwallets[i].id] = cuts[i + 1] - cuts[i];
    }
    return out;
  }

  void configure_faults() {
    FaultConfig faults;
    faults.seed = rng();
    faults.fail_next_k = chance(1, 3) ? below(5) : 0;
    if (config.fail_probability) {
      faults.fail_probability = *config.fail_probability;
    } else {
      static constexpr FaultProbability kChoices[] = {{0, 1}, {0, 1}, {1, 10}, {1, 4}, {1, 2}};
      faults.fail_probability = kChoices[below(std::size(kChoices))];
    }
    system.gateway().configure(faults);
  }

  void setup() {
    FaultConfig initial;
    initial.seed = config.seed;
    if (config.fail_probability) initial.fail_probability = *config.fail_probability;
    system.gateway().configure(initial);

    for (int i = 0; i < config.customers; ++i) {
      CustomerId id{"customer-" + std::to_string(i + 1)};
      std::vector<std::string> options;
      for (const char* o : kOptionPool) {
        if (chance(2, 3)) options.emplace_back(o);
      }
      if (options.empty()) options.emplace_back(kOptionPool[below(std::size(kOptionPool))]);
      const auto wallets = system.wallet_store().create_customer_wallets(id, options);
      (void)system.investments().set_policy(id, random_allocation(wallets->investment));
      customers.push_back(id);
      external_net[id] = Money{};
    }
  }

  Verdict verdict_of(const Transaction& t) {
    switch (t.status) {
      case TransactionStatus::Completed:
        return Verdict::Completed;
      case TransactionStatus::TransientError:
      case TransactionStatus::Processing:
        return Verdict::Transient;
      case TransactionStatus::Failed:
        return Verdict::Failed;
    }
    return Verdict::Failed;
  }

  Verdict verdict_of(const Outcome<WalletError, Transaction>& r) {
    return r ? verdict_of(r.value()) : Verdict::Failed;
  }

  Verdict verdict_of(const Outcome<InvestError, PendingRequest>& r) {
    if (r) return Verdict::Completed;
    return r.error().kind == InvestError::Kind::HoldTransient ? Verdict::Transient : Verdict::Failed;
  }

  std::vector<TransactionId> standalone_transient() const {
    std::vector<TransactionId> out;
    for (const auto& t : system.engine().transactions()) {
      if (t.status == TransactionStatus::TransientError && !t.batch_id) out.push_back(t.id);
    }
    return out;
  }

  Money available_of(const CustomerId& c, WalletType t) const {
    return available_balance(*system.wallet_store().wallet_of(c, t), system.ledger());
  }

  Verdict run_batch(const CustomerId& c) {
    const Wallet& rm = *system.wallet_store().wallet_of(c, WalletType::RealMoney);
    const Wallet& ef = *system.wallet_store().wallet_of(c, WalletType::EmergencyFunds);
    const Party rm_party = Party::of(rm, rm.primary_subwallet());
    const Party ef_party = Party::of(ef, ef.primary_subwallet());
    std::vector<TransactionId> members;
    const auto size = 1 + below(4);
    for (std::uint64_t i = 0; i < size; ++i) {
      const Money amount = random_amount(available_of(c, WalletType::RealMoney));
      auto& engine = system.engine();
      switch (below(4)) {
        case 0:
          members.push_back(engine.create_transaction(TransactionType::Deposit, amount, Party::external(), rm_party).id);
          break;
        case 1:
          members.push_back(engine.create_transaction(TransactionType::Withdrawal, amount, rm_party, Party::external()).id);
          break;
        case 2:
          members.push_back(engine.create_transaction(TransactionType::Transfer, amount, rm_party, ef_party).id);
          break;
        default:
          members.push_back(engine.create_transaction(TransactionType::Hold, amount, rm_party, rm_party).id);
          break;
      }
    }
    const auto batch = system.engine().create_batch(members);
    const auto done = system.engine().retry_batch(batch->id, system.retry_policy());
    if (done->status == BatchStatus::Completed) return Verdict::Completed;
    bool transient = false;
    for (const auto& id : members) {
      if (system.engine().find(id)->status == TransactionStatus::TransientError) {
        transient = true;
        (void)system.engine().abandon_transaction(id);
      }
    }
    return transient ? Verdict::Transient : Verdict::Failed;
  }

  void step() {
    std::uint64_t total_weight = 0;
    for (const auto& w : kOps) total_weight += w.weight;
    std::uint64_t pick = below(total_weight);
    const OpWeight* chosen = &kOps[0];
    for (const auto& w : kOps) {
      if (pick < w.weight) {
        chosen = &w;
        break;
      }
      pick -= w.weight;
    }
    ++report.per_operation[chosen->name];
    system.clock().advance(chr::minutes{1 + static_cast<int>(below(30))});

    auto& wallets = system.wallet_service();
    auto& investments = system.investments();
    const CustomerId& c = any_customer();
    std::optional<Verdict> verdict;

    switch (chosen->op) {
      case Op::Deposit:
        verdict = verdict_of(wallets.deposit(c, Money{1 + static_cast<std::int64_t>(below(100000))}));
        break;
      case Op::Withdraw:
        verdict = verdict_of(wallets.withdraw(c, random_amount(available_of(c, WalletType::RealMoney))));
        break;
      case Op::EmergencyAllocate:
        verdict = verdict_of(wallets.emergency_allocate(c, random_amount(available_of(c, WalletType::RealMoney))));
        break;
      case Op::EmergencyRelease:
        verdict = verdict_of(wallets.emergency_release(c, random_amount(available_of(c, WalletType::EmergencyFunds))));
        break;
      case Op::Invest:
        verdict = verdict_of(investments.invest(c, random_amount(available_of(c, WalletType::RealMoney))));
        break;
      case Op::Liquidate:
        verdict = verdict_of(investments.liquidate(c, random_amount(available_of(c, WalletType::Investment))));
        break;
      case Op::SettleTick: {
        const auto today = chr::floor<chr::days>(system.clock().now());
        system.clock().set(Timestamp{today + chr::days{1 + static_cast<int>(below(3))}} + chr::hours{9});
        (void)investments.settle(system.clock().today());
        break;
      }
      case Op::GatewayReconfigure:
        configure_faults();
        break;
      case Op::RetryTransient: {
        const auto candidates = standalone_transient();
        if (candidates.empty()) break;
        const auto r = system.retry_transaction(candidates[below(candidates.size())]);
        verdict = r ? verdict_of(r.value()) : Verdict::Failed;
        break;
      }
      case Op::AbandonTransient: {
        const auto candidates = standalone_transient();
        if (candidates.empty()) break;
        const auto r = system.engine().abandon_transaction(candidates[below(candidates.size())]);
        if (r) investments.on_transaction_updated(r.value());
        break;
      }
      case Op::PolicyChange: {
        const Wallet& inv = *system.wallet_store().wallet_of(c, WalletType::Investment);
        (void)investments.set_policy(c, random_allocation(inv));
        break;
      }
      case Op::MixedBatch:
        verdict = run_batch(c);
        break;
    }

    if (verdict) {
      ++report.attempted;
      switch (*verdict) {
        case Verdict::Completed:
          ++report.completed;
          break;
        case Verdict::Failed:
          ++report.failed;
          break;
        case Verdict::Transient:
          ++report.transient;
          break;
      }
    }
  }

  std::optional<CustomerId> customer_of(const Party& p) const {
    const auto* ref = p.wallet_ref();
    if (ref == nullptr) return std::nullopt;
    const Wallet* w = system.wallet_store().find_wallet(ref->wallet_id);
    return w ? std::optional<CustomerId>(w->customer) : std::nullopt;
  }

  void check() {
    const Ledger& ledger = system.ledger();

    ++zero_sum.checks;
    if (!ledger.total().is_zero()) violate(zero_sum, "ledger total " + ledger.total().to_decimal_string());

    ++pairing.checks;
    const auto entries = ledger.entries();
    if ((entries.size() - checked_entries) % 2 != 0) violate(pairing, "odd number of new entries");
    for (std::size_t i = checked_entries; i + 1 < entries.size(); i += 2) {
      const auto& a = entries[i];
      const auto& b = entries[i + 1];
      if (a.transaction_id != b.transaction_id) violate(pairing, "entries " + a.entry_id.str() + " not paired");
      if (!(a.amount + b.amount).is_zero()) violate(pairing, "pair " + a.transaction_id.str() + " does not sum to 0");
      if (!posted.insert(a.transaction_id).second) {
        violate(pairing, "second pair for " + a.transaction_id.str());
      }
    }
    checked_entries = entries.size();

    ++non_negative.checks;
    for (const auto& [key, value] : ledger.cached_balances()) {
      if (value.is_negative()) {
        violate(non_negative, key.first.str() + "/" + std::string(to_string(key.second)) + " = " +
                                  value.to_decimal_string());
      }
    }

    ++state_machine.checks;
    ++exactly_once.checks;
    const auto& txns = system.engine().transactions();
    seen_status.resize(txns.size(), TransactionStatus::Processing);
    seen_history.resize(txns.size(), 0);
    for (std::size_t i = 0; i < txns.size(); ++i) {
      const auto& t = txns[i];
      if (t.history.size() == seen_history[i] && t.status == seen_status[i]) continue;
      if (is_terminal(seen_status[i])) violate(state_machine, t.id.str() + " left a terminal state");
      if (!replay_is_sound(t.history, t.status)) violate(state_machine, t.id.str() + " has an unsound history");
      if (t.status == TransactionStatus::Completed) {
        if (std::find(t.history.begin(), t.history.end(), TransactionEvent::ExecutionSucceeded) == t.history.end()) {
          violate(state_machine, t.id.str() + " completed without a successful execution");
        }
        if (ledger.entries_for_transaction(t.id).size() != 2) {
          violate(exactly_once, t.id.str() + " completed without exactly one pair");
        }
        if (t.txn_type == TransactionType::Deposit) {
          if (auto c = customer_of(t.beneficiary)) external_net[*c] += t.amount;
        } else if (t.txn_type == TransactionType::Withdrawal) {
          if (auto c = customer_of(t.originator)) external_net[*c] -= t.amount;
        }
      } else if (!ledger.entries_for_transaction(t.id).empty()) {
        violate(exactly_once, t.id.str() + " has entries but is " + std::string(to_string(t.status)));
      }
      seen_status[i] = t.status;
      seen_history[i] = t.history.size();
    }

    ++conservation.checks;
    for (const auto& c : customers) {
      const auto summary = system.wallet_service().summary(c);
      if (summary->total() != external_net[c]) {
        violate(conservation, c.str() + " holds " + summary->total().to_decimal_string() + " but net external flow is " +
                                  external_net[c].to_decimal_string());
      }
    }
  }

  void final_checks() {
    const Ledger& ledger = system.ledger();
    ++zero_sum.checks;
    Money scanned;
    for (const auto& e : ledger.entries()) scanned += e.amount;
    if (!scanned.is_zero()) violate(zero_sum, "full scan total " + scanned.to_decimal_string());

    ++exactly_once.checks;
    for (const auto& id : posted) {
      const Transaction* t = system.engine().find(id);
      if (t == nullptr || t->status != TransactionStatus::Completed) {
        violate(exactly_once, id.str() + " posted but not completed");
      }
    }

    for (const auto& w : system.wallet_store().wallets()) {
      for (const auto& s : w.subwallets) {
        for (const auto type : {BalanceType::Available, BalanceType::Holding}) {
          ++oracle.checks;
          if (ledger.balance(s.id, type) != ledger.scan_balance_of(s.id, type)) {
            violate(oracle, s.id.str() + "/" + std::string(to_string(type)) + " cache differs from scan");
          }
        }
      }
    }
  }

  void finish() {
    report.seed = config.seed;
    report.ops = config.ops;
    report.invariants = {zero_sum, pairing, non_negative, conservation, state_machine, exactly_once, oracle};
    report.ledger_entries = system.ledger().size();
    for (const auto& c : customers) {
      const auto summary = system.wallet_service().summary(c);
      auto& row = report.final_balances[c.str()];
      for (const auto& w : summary->wallets) {
        const std::string type(to_string(w.wallet_type));
        row[type + ".available"] = w.available.minor_units();
        row[type + ".holding"] = w.holding.minor_units();
      }
    }
  }
};

Simulation::Simulation(SimulationConfig config)
    : config_(config), system_(std::make_unique<WalletSystem>()), impl_(std::make_unique<Impl>(config_, *system_)) {}

Simulation::~Simulation() = default;

SimulationReport Simulation::run() {
  if (config_.customers > 0 && config_.ops > 0) impl_->setup();
  for (std::uint64_t i = 0; i < config_.ops && !impl_->customers.empty(); ++i) {
    impl_->step();
    impl_->check();
  }
  impl_->final_checks();
  impl_->finish();
  return impl_->report;
}

}  // namespace dwallet
