#include "dwallet/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dwallet/persistence.hpp"
#include "dwallet/simulation.hpp"
#include "dwallet/system.hpp"
#include "json.hpp"

namespace dwallet::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v ? std::optional<std::string>(v) : std::nullopt;
}

namespace {

/// A failure that maps onto an exit code and a message on stderr.
struct CommandFailure {
  int code;
  std::string message;
};

struct GlobalOptions {
  std::string state_dir;
  bool as_json = false;
  std::string now;
  std::string fail_next_k;
  std::string fail_prob;
  std::string gw_seed;
  int max_attempts = RetryPolicy::kDefaultMaxAttempts;
  std::string holidays_file;
};

[[noreturn]] void usage(std::string message) { throw CommandFailure{kUsageError, std::move(message)}; }
[[noreturn]] void permanent(std::string message) { throw CommandFailure{kPermanentFailure, std::move(message)}; }

Money parse_amount(const std::string& text) {
  const auto m = Money::parse_decimal(text);
  if (!m) usage("invalid amount '" + text + "': expected a decimal with at most two fraction digits");
  return *m;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) usage("invalid " + what + " '" + text + "'");
  return v;
}

std::string money_str(Money m) { return m.to_decimal_string(); }

json transaction_json(const Transaction& t) {
  json j{{"id", t.id.str()},
         {"type", std::string(to_string(t.txn_type))},
         {"amount", money_str(t.amount)},
         {"status", std::string(to_string(t.status))},
         {"attempts", t.attempts}};
  j["last_error"] = t.last_error ? json(t.last_error->code) : json(nullptr);
  return j;
}

json allocation_json(const Allocation& a) {
  json j = json::object();
  for (const auto& [id, m] : a) j[id.str()] = money_str(m);
  return j;
}

json request_json(const PendingRequest& r) {
  json holds = json::array();
  for (const auto& h : r.hold_txn_ids) holds.push_back(h.str());
  return json{{"id", r.id.str()},
              {"customer", r.customer.str()},
              {"kind", std::string(to_string(r.kind))},
              {"amount", money_str(r.amount)},
              {"status", std::string(to_string(r.status))},
              {"initiated_on", format_date(r.initiated_on)},
              {"per_subwallet_amounts", allocation_json(r.per_subwallet_amounts)},
              {"hold_txn_ids", holds}};
}

json summary_json(const CustomerSummary& s) {
  json wallets = json::array();
  for (const auto& w : s.wallets) {
    json subs = json::array();
    for (const auto& sb : w.subwallets) {
      subs.push_back({{"id", sb.id.str()},
                      {"name", sb.name},
                      {"available", money_str(sb.available)},
                      {"holding", money_str(sb.holding)}});
    }
    wallets.push_back({{"wallet_id", w.id.str()},
                       {"wallet_type", std::string(to_string(w.wallet_type))},
                       {"available", money_str(w.available)},
                       {"holding", money_str(w.holding)},
                       {"subwallets", subs}});
  }
  return json{{"customer", s.customer.str()}, {"wallets", wallets}};
}

std::string summary_text(const CustomerSummary& s) {
  std::ostringstream out;
  out << "customer " << s.customer.str() << "\n";
  for (const auto& w : s.wallets) {
    out << "  " << to_string(w.wallet_type) << " " << w.id.str() << ": available " << money_str(w.available)
        << ", holding " << money_str(w.holding) << "\n";
    if (w.wallet_type == WalletType::Investment) {
      for (const auto& sb : w.subwallets) {
        out << "    " << sb.name << " " << sb.id.str() << ": available " << money_str(sb.available) << ", holding "
            << money_str(sb.holding) << "\n";
      }
    }
  }
  return out.str();
}

int exit_code_for(TransactionStatus s) {
  switch (s) {
    case TransactionStatus::Completed:
      return kOk;
    case TransactionStatus::Failed:
      return kPermanentFailure;
    case TransactionStatus::TransientError:
    case TransactionStatus::Processing:
      return kTransientFailure;
  }
  return kPermanentFailure;
}

/// Executes one parsed command against a loaded system.
class Runner {
 public:
  Runner(GlobalOptions options, std::ostream& out, const EnvLookup& env)
      : options_(std::move(options)), out_(out), env_(env) {}

  SystemConfig config() const {
    SystemConfig cfg;
    auto pick = [&](const std::string& flag, const char* var) -> std::optional<std::string> {
      if (!flag.empty()) return flag;
      return env_(var);
    };
    if (auto k = pick(options_.fail_next_k, "GW_FAIL_NEXT_K")) cfg.faults.fail_next_k = parse_u64(*k, "--gw-fail-next-k");
    if (auto p = pick(options_.fail_prob, "GW_FAIL_PROB")) {
      const auto prob = FaultProbability::parse(*p);
      if (!prob) usage("invalid --gw-fail-prob '" + *p + "': expected a probability in [0,1]");
      cfg.faults.fail_probability = *prob;
    }
    if (auto s = pick(options_.gw_seed, "GW_SEED")) cfg.faults.seed = parse_u64(*s, "--gw-seed");
    const auto policy = RetryPolicy::with_max_attempts(options_.max_attempts);
    if (!policy) usage("--max-attempts must be at least 1");
    cfg.retry_policy = *policy;
    if (!options_.holidays_file.empty()) {
      std::ifstream in(options_.holidays_file);
      if (!in) usage("cannot read holiday file " + options_.holidays_file);
      std::stringstream ss;
      ss << in.rdbuf();
      auto cal = BusinessCalendar::parse(ss.str());
      if (!cal) usage("holiday file: " + cal.error());
      cfg.calendar = std::move(cal).value();
    }
    return cfg;
  }

  fs::path state_dir() const {
    if (!options_.state_dir.empty()) return options_.state_dir;
    if (auto env = env_("DWALLET_STATE_DIR")) return *env;
    return "dwallet-state";
  }

  WalletSystem& load() {
    const auto cfg = config();
    auto imported = import_state(state_dir(), cfg);
    if (!imported) permanent(describe(imported.error()));
    system_ = std::move(imported).value();
    if (!options_.now.empty()) {
      const auto t = parse_timestamp(options_.now);
      if (!t) usage("invalid --now '" + options_.now + "': expected YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ");
      system_->clock().set(*t);
    }
    return *system_;
  }

  void save() {
    if (auto r = export_state(*system_, state_dir()); !r) permanent(describe(r.error()));
  }

  void emit(const json& j, const std::string& text) {
    if (options_.as_json) {
      out_ << j.dump(2) << "\n";
    } else {
      out_ << text;
    }
  }

  int emit_transaction(const Transaction& t) {
    std::string text = std::string(to_string(t.status)) + " " + t.id.str() + " " + std::string(to_string(t.txn_type)) +
                       " " + money_str(t.amount) + " (attempts " + std::to_string(t.attempts) + ")";
    if (t.last_error) text += " " + t.last_error->code;
    emit(transaction_json(t), text + "\n");
    return exit_code_for(t.status);
  }

  CustomerId customer_or_fail(const std::string& name) {
    CustomerId id{name};
    if (!system_->wallet_store().has_customer(id)) permanent("UnknownCustomer: " + name);
    return id;
  }

  int customer_create(const std::string& customer, const std::vector<std::string>& options) {
    auto& sys = load();
    auto created = sys.wallet_store().create_customer_wallets(CustomerId{customer}, options);
    if (!created) permanent(std::string(to_string(created.error())) + ": " + customer);
    save();
    const auto summary = sys.wallet_service().summary(CustomerId{customer});
    emit(summary_json(summary.value()), summary_text(summary.value()));
    return kOk;
  }

  int policy_set(const std::string& customer, const std::vector<std::string>& allocs) {
    auto& sys = load();
    const auto id = customer_or_fail(customer);
    const Wallet& inv = *sys.wallet_store().wallet_of(id, WalletType::Investment);
    std::map<SubwalletId, int> allocations;
    for (const auto& a : allocs) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) usage("--alloc expects NAME=PERCENT, got '" + a + "'");
      const auto key = a.substr(0, eq);
      const auto pct = Money::parse_decimal(a.substr(eq + 1));
      if (!pct || pct->minor_units() > 1'000'000) usage("invalid percentage in '" + a + "'");
      SubwalletId target{key};
      for (const auto& s : inv.subwallets) {
        if (s.name == key) target = s.id;
      }
      allocations[target] = static_cast<int>(pct->minor_units());  // percent with 2 decimals == basis points
    }
    auto stored = sys.investments().set_policy(id, allocations);
    if (!stored) permanent(describe(stored.error()));
    save();
    json alloc = json::object();
    std::string text = "policy for " + customer + ":\n";
    for (const auto& [sid, bp] : stored->allocations) {
      alloc[sid.str()] = bp;
      const auto* s = inv.find_subwallet(sid);
      text += "  " + (s ? s->name : sid.str()) + " " + sid.str() + ": " + std::to_string(bp) + " bp\n";
    }
    emit(json{{"customer", customer}, {"allocations_bp", alloc}}, text);
    return kOk;
  }

  int money_movement(RequestType kind, const std::string& customer, const std::string& amount_text) {
    const Money amount = parse_amount(amount_text);
    auto& sys = load();
    const auto id = customer_or_fail(customer);
    auto& svc = sys.wallet_service();
    Outcome<WalletError, Transaction> result = [&] {
      switch (kind) {
        case RequestType::Withdraw:
          return svc.withdraw(id, amount);
        case RequestType::EmergencyAllocation:
          return svc.emergency_allocate(id, amount);
        case RequestType::EmergencyRelease:
          return svc.emergency_release(id, amount);
        default:
          return svc.deposit(id, amount);
      }
    }();
    save();
    if (!result) permanent(describe(result.error()));
    return emit_transaction(result.value());
  }

  int investment(RequestKind kind, const std::string& customer, const std::string& amount_text) {
    const Money amount = parse_amount(amount_text);
    auto& sys = load();
    const auto id = customer_or_fail(customer);
    auto result = kind == RequestKind::Investment ? sys.investments().invest(id, amount)
                                                  : sys.investments().liquidate(id, amount);
    save();
    if (!result) {
      const auto& e = result.error();
      std::string message = describe(e);
      if (e.transaction) message += " " + e.transaction->str();
      throw CommandFailure{e.kind == InvestError::Kind::HoldTransient ? kTransientFailure : kPermanentFailure, message};
    }
    const auto& r = result.value();
    std::string text = std::string(to_string(r.status)) + " " + r.id.str() + " " + std::string(to_string(r.kind)) +
                       " " + money_str(r.amount) + " initiated " + format_date(r.initiated_on) + "\n";
    for (const auto& [sid, m] : r.per_subwallet_amounts) text += "  " + sid.str() + ": " + money_str(m) + "\n";
    emit(request_json(r), text);
    return kOk;
  }

  int settle(const std::string& date_text) {
    const auto date = parse_date(date_text);
    if (!date) usage("invalid --date '" + date_text + "': expected YYYY-MM-DD");
    auto& sys = load();
    const Timestamp midnight{std::chrono::sys_days{*date}};
    if (sys.clock().now() < midnight) sys.clock().set(midnight);
    const auto results = sys.investments().settle(*date);
    save();
    json arr = json::array();
    std::string text;
    for (const auto& r : results) {
      auto j = request_json(r.request);
      j["settled"] = r.settled;
      arr.push_back(j);
      text += std::string(r.settled ? "SETTLED " : "PENDING ") + r.request.id.str() + " " +
              std::string(to_string(r.request.kind)) + " " + money_str(r.request.amount) + "\n";
    }
    if (results.empty()) text = "nothing to settle\n";
    emit(json{{"date", format_date(*date)}, {"results", arr}}, text);
    return kOk;
  }

  int retry(const std::string& txn_id) {
    auto& sys = load();
    auto result = sys.retry_transaction(TransactionId{txn_id});
    if (!result) permanent(std::string(to_string(result.error().kind)) + ": " + result.error().detail);
    save();
    return emit_transaction(result.value());
  }

  int balance(const std::string& customer, bool all) {
    auto& sys = load();
    std::vector<CustomerId> ids;
    if (all) {
      ids = sys.wallet_store().customers();
    } else {
      if (customer.empty()) usage("balance needs --customer or --all");
      ids.push_back(customer_or_fail(customer));
    }
    json arr = json::array();
    std::string text;
    for (const auto& id : ids) {
      const auto s = sys.wallet_service().summary(id);
      arr.push_back(summary_json(s.value()));
      text += summary_text(s.value());
    }
    emit(all ? arr : arr.front(), text);
    return kOk;
  }

  int ledger_dump() {
    auto& sys = load();
    // JSON Lines already; --json does not change the format.
    sys.ledger().export_jsonl(out_);
    return kOk;
  }

  int state_export(const std::string& dir) {
    auto& sys = load();
    if (auto r = export_state(sys, dir); !r) permanent(describe(r.error()));
    emit(json{{"exported", dir}}, "exported state to " + dir + "\n");
    return kOk;
  }

  int state_import(const std::string& dir) {
    if (!fs::exists(fs::path(dir) / "clock.json")) permanent("CorruptState(clock.json: missing in " + dir + ")");
    auto imported = import_state(dir, config());
    if (!imported) permanent(describe(imported.error()));
    system_ = std::move(imported).value();
    save();
    emit(json{{"imported", dir}}, "imported state from " + dir + "\n");
    return kOk;
  }

  int simulate(std::uint64_t seed, std::uint64_t ops, int customers, const std::string& export_dir) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.ops = ops;
    cfg.customers = customers;
    const auto p = options_.fail_prob.empty() ? env_("GW_FAIL_PROB") : std::optional(options_.fail_prob);
    if (p) {
      cfg.fail_probability = FaultProbability::parse(*p);
      if (!cfg.fail_probability) usage("invalid --gw-fail-prob '" + *p + "'");
    }
    Simulation sim(cfg);
    const auto report = sim.run();
    if (!export_dir.empty()) {
      if (auto r = export_state(sim.system(), export_dir); !r) permanent(describe(r.error()));
    }
    if (options_.as_json) {
      out_ << report.to_json() << "\n";
    } else {
      out_ << report.to_text();
    }
    return report.total_violations() == 0 ? kOk : kPermanentFailure;
  }

 private:
  GlobalOptions options_;
  std::ostream& out_;
  const EnvLookup& env_;
  std::unique_ptr<WalletSystem> system_;
};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Digital wallet engine: wallets, double-entry ledger, investments and settlement", "dwallet"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GlobalOptions g;
  app.add_option("--state-dir", g.state_dir, "State directory (default $DWALLET_STATE_DIR or ./dwallet-state)");
  app.add_flag("--json", g.as_json, "Machine-readable JSON output");
  app.add_option("--now", g.now, "Set the logical clock (YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ)");
  app.add_option("--gw-fail-next-k", g.fail_next_k, "Gateway: fail the next K calls (env GW_FAIL_NEXT_K)");
  app.add_option("--gw-fail-prob", g.fail_prob, "Gateway: failure probability, e.g. 0.25 or 1/3 (env GW_FAIL_PROB)");
  app.add_option("--gw-seed", g.gw_seed, "Gateway: fault generator seed (env GW_SEED)");
  app.add_option("--max-attempts", g.max_attempts, "Execution attempts per transaction")->capture_default_str();
  app.add_option("--holidays", g.holidays_file, "File with one holiday date (YYYY-MM-DD) per line");

  std::string customer, amount, date, txn_id, dir, export_dir;
  std::vector<std::string> options, allocs;
  bool all = false;
  std::uint64_t seed = 42, ops = 1000;
  int sim_customers = 4;

  auto* customer_cmd = app.add_subcommand("customer", "Customer management")->require_subcommand(1);
  auto* customer_create = customer_cmd->add_subcommand("create", "Create the three wallets of a customer");
  customer_create->add_option("--customer", customer, "Customer id")->required();
  customer_create->add_option("--options", options, "Investment options, comma separated")
      ->required()
      ->delimiter(',');

  auto* policy_cmd = app.add_subcommand("policy", "Investment policy")->require_subcommand(1);
  auto* policy_set = policy_cmd->add_subcommand("set", "Replace the investment policy");
  policy_set->add_option("--customer", customer, "Customer id")->required();
  policy_set->add_option("--alloc", allocs, "NAME=PERCENT (up to two decimals), repeatable")->required();

  auto add_movement = [&](const char* name, const char* help, CLI::App* parent) {
    auto* sub = parent->add_subcommand(name, help);
    sub->add_option("--customer", customer, "Customer id")->required();
    sub->add_option("--amount", amount, "Amount, e.g. 100.00")->required();
    return sub;
  };
  auto* deposit = add_movement("deposit", "External bank -> RealMoney", &app);
  auto* withdraw = add_movement("withdraw", "RealMoney -> external bank", &app);
  auto* emergency = app.add_subcommand("emergency", "EmergencyFunds transfers")->require_subcommand(1);
  auto* allocate = add_movement("allocate", "RealMoney -> EmergencyFunds", emergency);
  auto* release = add_movement("release", "EmergencyFunds -> RealMoney", emergency);
  auto* invest = add_movement("invest", "Hold funds for investment per the policy", &app);
  auto* liquidate = add_movement("liquidate", "Hold investments for liquidation per the policy", &app);

  auto* settle = app.add_subcommand("settle", "Settle pending investments and liquidations");
  settle->add_option("--date", date, "Settlement date YYYY-MM-DD")->required();

  auto* retry = app.add_subcommand("retry", "Retry a transaction in TRANSIENT_ERROR");
  retry->add_option("--txn-id", txn_id, "Transaction id")->required();

  auto* balance = app.add_subcommand("balance", "Balances per wallet and subwallet");
  auto* bal_customer = balance->add_option("--customer", customer, "Customer id");
  balance->add_flag("--all", all, "Every customer")->excludes(bal_customer);

  auto* ledger = app.add_subcommand("ledger", "Ledger access")->require_subcommand(1);
  auto* ledger_dump = ledger->add_subcommand("dump", "Print the ledger as JSON Lines");

  auto* state = app.add_subcommand("state", "State directory transfer")->require_subcommand(1);
  auto* state_export = state->add_subcommand("export", "Copy current state to a directory");
  state_export->add_option("--dir", dir, "Target directory")->required();
  auto* state_import = state->add_subcommand("import", "Replace current state with a directory's content");
  state_import->add_option("--dir", dir, "Source directory")->required();

  auto* simulate = app.add_subcommand("simulate", "Run the seeded invariant-checking simulation");
  simulate->add_option("--seed", seed, "Generator seed")->capture_default_str();
  simulate->add_option("--ops", ops, "Number of operations")->capture_default_str();
  simulate->add_option("--customers", sim_customers, "Number of customers")->capture_default_str();
  simulate->add_option("--export-dir", export_dir, "Write the final state here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  Runner runner(g, out, env);
  try {
    if (customer_create->parsed()) return runner.customer_create(customer, options);
    if (policy_set->parsed()) return runner.policy_set(customer, allocs);
    if (deposit->parsed()) return runner.money_movement(RequestType::Deposit, customer, amount);
    if (withdraw->parsed()) return runner.money_movement(RequestType::Withdraw, customer, amount);
    if (allocate->parsed()) return runner.money_movement(RequestType::EmergencyAllocation, customer, amount);
    if (release->parsed()) return runner.money_movement(RequestType::EmergencyRelease, customer, amount);
    if (invest->parsed()) return runner.investment(RequestKind::Investment, customer, amount);
    if (liquidate->parsed()) return runner.investment(RequestKind::Liquidation, customer, amount);
    if (settle->parsed()) return runner.settle(date);
    if (retry->parsed()) return runner.retry(txn_id);
    if (balance->parsed()) return runner.balance(customer, all);
    if (ledger_dump->parsed()) return runner.ledger_dump();
    if (state_export->parsed()) return runner.state_export(dir);
    if (state_import->parsed()) return runner.state_import(dir);
    if (simulate->parsed()) return runner.simulate(seed, ops, sim_customers, export_dir);
  } catch (const CommandFailure& f) {
    err << f.message << "\n";
    return f.code;
  }
  err << "error: no command\n";
  return kUsageError;
}

}  // namespace dwallet::cli
