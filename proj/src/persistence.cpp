#include "dwallet/persistence.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dwallet {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string describe(const CorruptState& e) { return "CorruptState(" + e.file + ": " + e.reason + ")"; }

namespace {

/// Thrown inside the decoders; converted to CorruptState at the boundary.
struct DecodeError {
  std::string reason;
};

template <typename T>
T require(std::optional<T> v, const std::string& what) {
  if (!v) throw DecodeError{"bad " + what};
  return *v;
}

json money(Money m) { return m.minor_units(); }
Money money_from(const json& j) { return Money{j.get<std::int64_t>()}; }

json party_to_json(const Party& p) {
  json j;
  if (const auto* ref = p.wallet_ref()) {
    j["kind"] = "WALLET";
    j["wallet_id"] = ref->wallet_id.str();
    j["subwallet_id"] = ref->subwallet_id.str();
  } else {
    const auto* ext = p.external_account();
    j["kind"] = "EXTERNAL";
    j["reference"] = ext->reference ? json(*ext->reference) : json(nullptr);
  }
  return j;
}

Party party_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "WALLET") {
    return Party::wallet(WalletId{j.at("wallet_id").get<std::string>()},
                         SubwalletId{j.at("subwallet_id").get<std::string>()});
  }
  if (kind != "EXTERNAL") throw DecodeError{"unknown party kind " + kind};
  const auto& ref = j.at("reference");
  return Party::external(ref.is_null() ? std::nullopt : std::optional<std::string>(ref.get<std::string>()));
}

json allocation_to_json(const Allocation& a) {
  json j = json::object();
  for (const auto& [id, m] : a) j[id.str()] = money(m);
  return j;
}

Allocation allocation_from_json(const json& j) {
  Allocation a;
  for (const auto& [k, v] : j.items()) a.emplace(SubwalletId{k}, money_from(v));
  return a;
}

json policy_to_json(const InvestmentPolicy& p) {
  json alloc = json::object();
  for (const auto& [id, bp] : p.allocations) alloc[id.str()] = bp;
  return json{{"customer", p.customer.str()}, {"allocations_bp", alloc}};
}

InvestmentPolicy policy_from_json(const json& j) {
  InvestmentPolicy p{CustomerId{j.at("customer").get<std::string>()}, {}};
  for (const auto& [k, v] : j.at("allocations_bp").items()) p.allocations.emplace(SubwalletId{k}, v.get<int>());
  return p;
}

json wallet_to_json(const Wallet& w) {
  json subs = json::array();
  for (const auto& s : w.subwallets) subs.push_back({{"id", s.id.str()}, {"name", s.name}});
  return json{{"id", w.id.str()},
              {"customer", w.customer.str()},
              {"wallet_type", std::string(to_string(w.wallet_type))},
              {"subwallets", subs}};
}

Wallet wallet_from_json(const json& j) {
  Wallet w{WalletId{j.at("id").get<std::string>()}, CustomerId{j.at("customer").get<std::string>()},
           require(parse_wallet_type(j.at("wallet_type").get<std::string>()), "wallet_type"), {}};
  for (const auto& s : j.at("subwallets")) {
    w.subwallets.push_back({SubwalletId{s.at("id").get<std::string>()}, w.id, s.at("name").get<std::string>()});
  }
  return w;
}

json transaction_to_json(const Transaction& t) {
  json history = json::array();
  for (const auto e : t.history) history.push_back(std::string(to_string(e)));
  return json{{"id", t.id.str()},
              {"txn_type", std::string(to_string(t.txn_type))},
              {"amount", money(t.amount)},
              {"originator", party_to_json(t.originator)},
              {"beneficiary", party_to_json(t.beneficiary)},
              {"status", std::string(to_string(t.status))},
              {"attempts", t.attempts},
              {"batch_id", t.batch_id ? json(t.batch_id->str()) : json(nullptr)},
              {"created_at", format_timestamp(t.created_at)},
              {"last_error", t.last_error ? json{{"code", t.last_error->code}, {"detail", t.last_error->detail}}
                                          : json(nullptr)},
              {"history", history}};
}

Transaction transaction_from_json(const json& j) {
  Transaction t;
  t.id = TransactionId{j.at("id").get<std::string>()};
  t.txn_type = require(parse_transaction_type(j.at("txn_type").get<std::string>()), "txn_type");
  t.amount = money_from(j.at("amount"));
  t.originator = party_from_json(j.at("originator"));
  t.beneficiary = party_from_json(j.at("beneficiary"));
  t.status = require(parse_transaction_status(j.at("status").get<std::string>()), "status");
  t.attempts = j.at("attempts").get<int>();
  if (const auto& b = j.at("batch_id"); !b.is_null()) t.batch_id = BatchId{b.get<std::string>()};
  t.created_at = require(parse_timestamp(j.at("created_at").get<std::string>()), "created_at");
  if (const auto& e = j.at("last_error"); !e.is_null()) {
    t.last_error = ErrorInfo{e.at("code").get<std::string>(), e.at("detail").get<std::string>()};
  }
  for (const auto& e : j.at("history")) {
    t.history.push_back(require(parse_transaction_event(e.get<std::string>()), "history event"));
  }
  return t;
}

json batch_to_json(const Batch& b) {
  json members = json::array();
  for (const auto& m : b.members) members.push_back(m.str());
  return json{{"id", b.id.str()}, {"members", members}, {"status", std::string(to_string(b.status))}};
}

Batch batch_from_json(const json& j) {
  Batch b{BatchId{j.at("id").get<std::string>()}, {},
          require(parse_batch_status(j.at("status").get<std::string>()), "batch status")};
  for (const auto& m : j.at("members")) b.members.emplace_back(m.get<std::string>());
  return b;
}

json request_to_json(const PendingRequest& r) {
  json holds = json::array();
  for (const auto& h : r.hold_txn_ids) holds.push_back(h.str());
  return json{{"id", r.id.str()},
              {"customer", r.customer.str()},
              {"kind", std::string(to_string(r.kind))},
              {"amount", money(r.amount)},
              {"policy_snapshot", policy_to_json(r.policy_snapshot)},
              {"hold_txn_ids", holds},
              {"per_subwallet_amounts", allocation_to_json(r.per_subwallet_amounts)},
              {"initiated_on", format_date(r.initiated_on)},
              {"status", std::string(to_string(r.status))},
              {"settlement_batch", r.settlement_batch ? json(r.settlement_batch->str()) : json(nullptr)}};
}

PendingRequest request_from_json(const json& j) {
  PendingRequest r;
  r.id = RequestId{j.at("id").get<std::string>()};
  r.customer = CustomerId{j.at("customer").get<std::string>()};
  r.kind = require(parse_request_kind(j.at("kind").get<std::string>()), "request kind");
  r.amount = money_from(j.at("amount"));
  r.policy_snapshot = policy_from_json(j.at("policy_snapshot"));
  for (const auto& h : j.at("hold_txn_ids")) r.hold_txn_ids.emplace_back(h.get<std::string>());
  r.per_subwallet_amounts = allocation_from_json(j.at("per_subwallet_amounts"));
  r.initiated_on = require(parse_date(j.at("initiated_on").get<std::string>()), "initiated_on");
  r.status = require(parse_request_status(j.at("status").get<std::string>()), "request status");
  if (const auto& b = j.at("settlement_batch"); !b.is_null()) r.settlement_batch = BatchId{b.get<std::string>()};
  return r;
}

json awaiting_to_json(const AwaitingHold& a) {
  return json{{"hold_txn_id", a.hold_txn_id.str()},
              {"customer", a.customer.str()},
              {"amount", money(a.amount)},
              {"policy_snapshot", policy_to_json(a.policy_snapshot)},
              {"per_subwallet_amounts", allocation_to_json(a.per_subwallet_amounts)}};
}

AwaitingHold awaiting_from_json(const json& j) {
  return AwaitingHold{TransactionId{j.at("hold_txn_id").get<std::string>()},
                      CustomerId{j.at("customer").get<std::string>()}, money_from(j.at("amount")),
                      policy_from_json(j.at("policy_snapshot")),
                      allocation_from_json(j.at("per_subwallet_amounts"))};
}

json call_to_json(const GatewayCall& c) {
  return json{{"kind", c.kind == GatewayCall::Kind::Transfer ? "TRANSFER" : "COMPENSATION"},
              {"request_id", c.request_id.str()},
              {"direction", std::string(to_string(c.direction))},
              {"amount", money(c.amount)},
              {"external_ref", c.external_ref},
              {"succeeded", c.succeeded},
              {"token", c.token}};
}

GatewayCall call_from_json(const json& j) {
  GatewayCall c;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "TRANSFER" && kind != "COMPENSATION") throw DecodeError{"unknown gateway call kind"};
  c.kind = kind == "TRANSFER" ? GatewayCall::Kind::Transfer : GatewayCall::Kind::Compensation;
  c.request_id = TransactionId{j.at("request_id").get<std::string>()};
  c.direction = require(parse_transfer_direction(j.at("direction").get<std::string>()), "direction");
  c.amount = money_from(j.at("amount"));
  c.external_ref = j.at("external_ref").get<std::string>();
  c.succeeded = j.at("succeeded").get<bool>();
  c.token = j.at("token").get<std::string>();
  return c;
}

Outcome<CorruptState, Unit> write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return Outcome<CorruptState, Unit>::failure({path.filename().string(), "cannot open for writing"});
    out << content;
    if (!out) return Outcome<CorruptState, Unit>::failure({path.filename().string(), "write failed"});
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) return Outcome<CorruptState, Unit>::failure({path.filename().string(), ec.message()});
  return Outcome<CorruptState, Unit>::success({});
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

constexpr const char* kLedgerFile = "ledger.jsonl";
constexpr const char* kWalletsFile = "wallets.json";
constexpr const char* kTransactionsFile = "transactions.json";
constexpr const char* kPoliciesFile = "policies.json";
constexpr const char* kPendingFile = "pending.json";
constexpr const char* kClockFile = "clock.json";
constexpr const char* kGatewayFile = "gateway.json";

}  // namespace

Outcome<CorruptState, Unit> export_state(const WalletSystem& system, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return Outcome<CorruptState, Unit>::failure({dir.string(), ec.message()});

  json wallets = json::array();
  for (const auto& w : system.wallet_store().wallets()) wallets.push_back(wallet_to_json(w));

  json txns = json::array();
  for (const auto& t : system.engine().transactions()) txns.push_back(transaction_to_json(t));
  json batches = json::array();
  for (const auto& b : system.engine().batches()) batches.push_back(batch_to_json(b));

  json policies = json::array();
  for (const auto& [customer, p] : system.investments().policies()) policies.push_back(policy_to_json(p));

  json requests = json::array();
  for (const auto& r : system.investments().requests()) requests.push_back(request_to_json(r));
  json awaiting = json::array();
  for (const auto& a : system.investments().awaiting_holds()) awaiting.push_back(awaiting_to_json(a));

  json counters = json::object();
  for (const auto& [prefix, n] : system.ids().counters()) counters[prefix] = n;

  json calls = json::array();
  for (const auto& c : system.gateway().call_log()) calls.push_back(call_to_json(c));

  const std::pair<const char*, std::string> files[] = {
      {kLedgerFile, system.ledger().export_jsonl()},
      {kWalletsFile, json{{"wallets", wallets}}.dump(2) + "\n"},
      {kTransactionsFile, json{{"transactions", txns}, {"batches", batches}}.dump(2) + "\n"},
      {kPoliciesFile, json{{"policies", policies}}.dump(2) + "\n"},
      {kPendingFile, json{{"requests", requests}, {"awaiting_holds", awaiting}}.dump(2) + "\n"},
      {kGatewayFile, json{{"calls", calls}}.dump(2) + "\n"},
      // Written last: its presence marks a complete export.
      {kClockFile, json{{"now", format_timestamp(system.clock().now())}, {"id_counters", counters}}.dump(2) + "\n"},
  };
  for (const auto& [name, content] : files) {
    if (auto w = write_file(dir / name, content); !w) return w;
  }
  return Outcome<CorruptState, Unit>::success({});
}

Outcome<CorruptState, std::unique_ptr<WalletSystem>> import_state(const fs::path& dir, SystemConfig config) {
  using Result = Outcome<CorruptState, std::unique_ptr<WalletSystem>>;
  if (!fs::exists(dir / kClockFile)) {
    for (const char* name : {kLedgerFile, kWalletsFile, kTransactionsFile, kPoliciesFile, kPendingFile}) {
      if (fs::exists(dir / name)) return Result::failure({kClockFile, "missing while other state files exist"});
    }
    return Result::success(std::make_unique<WalletSystem>(std::move(config)));
  }

  std::string current = kClockFile;
  try {
    auto load_json = [&](const char* name) {
      current = name;
      const auto text = read_file(dir / name);
      if (!text) throw DecodeError{"missing or unreadable"};
      return json::parse(*text);
    };

    const json clock = load_json(kClockFile);
    config.start = require(parse_timestamp(clock.at("now").get<std::string>()), "now");
    auto system = std::make_unique<WalletSystem>(std::move(config));
    std::map<std::string, std::uint64_t> counters;
    for (const auto& [k, v] : clock.at("id_counters").items()) counters[k] = v.get<std::uint64_t>();
    system->ids().restore(std::move(counters));

    std::vector<Wallet> wallets;
    const json wallet_doc = load_json(kWalletsFile);
    for (const auto& w : wallet_doc.at("wallets")) wallets.push_back(wallet_from_json(w));
    if (auto r = system->wallet_store().restore(std::move(wallets)); !r) throw DecodeError{r.error()};

    current = kLedgerFile;
    const auto ledger_text = read_file(dir / kLedgerFile);
    if (!ledger_text) throw DecodeError{"missing or unreadable"};
    std::vector<JournalEntry> entries;
    std::istringstream lines(*ledger_text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::string why;
      auto entry = entry_from_json_line(line, &why);
      if (!entry) throw DecodeError{"line " + std::to_string(line_no) + ": " + why};
      entries.push_back(std::move(*entry));
    }
    if (auto r = system->ledger().restore(std::move(entries)); !r) throw DecodeError{r.error()};

    const json txn_doc = load_json(kTransactionsFile);
    std::vector<Transaction> txns;
    for (const auto& t : txn_doc.at("transactions")) txns.push_back(transaction_from_json(t));
    std::vector<Batch> batches;
    for (const auto& b : txn_doc.at("batches")) batches.push_back(batch_from_json(b));
    if (auto r = system->engine().restore(std::move(txns), std::move(batches)); !r) throw DecodeError{r.error()};

    // Exactly-once ledger effect: Completed <=> one pair in the ledger.
    std::set<TransactionId> posted;
    for (const auto& e : system->ledger().entries()) posted.insert(e.transaction_id);
    for (const auto& id : posted) {
      const Transaction* t = system->engine().find(id);
      if (t == nullptr || t->status != TransactionStatus::Completed) {
        throw DecodeError{"ledger holds entries for non-completed transaction " + id.str()};
      }
    }
    for (const auto& t : system->engine().transactions()) {
      if (t.status == TransactionStatus::Completed && !posted.contains(t.id)) {
        throw DecodeError{"completed transaction " + t.id.str() + " has no ledger entries"};
      }
    }

    std::vector<GatewayCall> calls;
    const json gateway_doc = load_json(kGatewayFile);
    for (const auto& c : gateway_doc.at("calls")) calls.push_back(call_from_json(c));
    system->gateway().restore_log(std::move(calls));

    std::map<CustomerId, InvestmentPolicy> policies;
    const json policy_doc = load_json(kPoliciesFile);
    for (const auto& p : policy_doc.at("policies")) {
      auto policy = policy_from_json(p);
      const auto customer = policy.customer;
      policies.emplace(customer, std::move(policy));
    }
    const json pending = load_json(kPendingFile);
    std::vector<PendingRequest> requests;
    for (const auto& r : pending.at("requests")) requests.push_back(request_from_json(r));
    std::vector<AwaitingHold> awaiting;
    for (const auto& a : pending.at("awaiting_holds")) awaiting.push_back(awaiting_from_json(a));
    current = kPendingFile;
    if (auto r = system->investments().restore(std::move(policies), std::move(requests), std::move(awaiting)); !r) {
      throw DecodeError{r.error()};
    }
    return Result::success(std::move(system));
  } catch (const DecodeError& e) {
    return Result::failure({current, e.reason});
  } catch (const json::exception& e) {
    return Result::failure({current, e.what()});
  }
}

}  // namespace dwallet
