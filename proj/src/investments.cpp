#include "dwallet/investments.hpp"

#include <algorithm>
#include <sstream>

#include "name_table.hpp"

namespace dwallet {

namespace chr = std::chrono;

namespace {

constexpr detail::NameTable<RequestKind, 2> kRequestKinds{{
    {RequestKind::Investment, "INVESTMENT"},
    {RequestKind::Liquidation, "LIQUIDATION"},
}};

constexpr detail::NameTable<RequestStatus, 3> kRequestStatuses{{
    {RequestStatus::Pending, "PENDING"},
    {RequestStatus::Settled, "SETTLED"},
    {RequestStatus::Failed, "FAILED"},
}};

}  // namespace

std::string_view to_string(RequestKind k) { return detail::name_of(kRequestKinds, k); }
std::string_view to_string(RequestStatus s) { return detail::name_of(kRequestStatuses, s); }
std::optional<RequestKind> parse_request_kind(std::string_view s) { return detail::value_of(kRequestKinds, s); }
std::optional<RequestStatus> parse_request_status(std::string_view s) { return detail::value_of(kRequestStatuses, s); }

std::string_view to_string(AllocationError e) {
  return e == AllocationError::InvalidPolicy ? "InvalidPolicy" : "NonPositiveAmount";
}

std::string_view to_string(InvestError::Kind k) {
  switch (k) {
    case InvestError::Kind::UnknownCustomer:
      return "UnknownCustomer";
    case InvestError::Kind::PolicyNotFound:
      return "PolicyNotFound";
    case InvestError::Kind::NonPositiveAmount:
      return "NonPositiveAmount";
    case InvestError::Kind::InvalidPolicy:
      return "InvalidPolicy";
    case InvestError::Kind::HoldFailed:
      return "HoldFailed";
    case InvestError::Kind::HoldTransient:
      return "HoldTransient";
    case InvestError::Kind::BatchFailed:
      return "BatchFailed";
  }
  return "InvestError";
}

std::string describe(const InvestError& e) {
  std::string out(to_string(e.kind));
  if (e.reason) {
    out += "(" + std::string(to_string(*e.reason)) + ")";
  } else if (!e.detail.empty()) {
    out += "(" + e.detail + ")";
  }
  return out;
}

// --- Calendar ---

Outcome<std::string, BusinessCalendar> BusinessCalendar::parse(std::string_view text) {
  std::set<chr::sys_days> holidays;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const auto date = parse_date(std::string_view(line).substr(first, last - first + 1));
    if (!date) return Outcome<std::string, BusinessCalendar>::failure("line " + std::to_string(line_no) + ": bad date");
    holidays.insert(chr::sys_days{*date});
  }
  return Outcome<std::string, BusinessCalendar>::success(BusinessCalendar{std::move(holidays)});
}

bool BusinessCalendar::is_business_day(Date d) const {
  const chr::sys_days day{d};
  const chr::weekday wd{day};
  if (wd == chr::Saturday || wd == chr::Sunday) return false;
  return !holidays_.contains(day);
}

Date next_business_day(Date d, const BusinessCalendar& calendar) {
  chr::sys_days day{d};
  do {
    day += chr::days{1};
  } while (!calendar.is_business_day(Date{day}));
  return Date{day};
}

// --- Allocation ---

Outcome<AllocationError, Allocation> allocate(Money amount, const InvestmentPolicy& policy) {
  using Result = Outcome<AllocationError, Allocation>;
  long long bp_sum = 0;
  for (const auto& [id, bp] : policy.allocations) {
    if (bp < 0) return Result::failure(AllocationError::InvalidPolicy);
    bp_sum += bp;
  }
  if (bp_sum != kFullAllocationBp) return Result::failure(AllocationError::InvalidPolicy);
  if (!amount.is_positive()) return Result::failure(AllocationError::NonPositiveAmount);

  struct Bucket {
    SubwalletId id;
    std::int64_t floor_share;
    std::int64_t remainder;  // numerator of the fractional part, over 10000
  };
  std::vector<Bucket> buckets;
  std::int64_t assigned = 0;
  for (const auto& [id, bp] : policy.allocations) {
    if (bp == 0) continue;
    const __int128 scaled = static_cast<__int128>(amount.minor_units()) * bp;
    const auto floor_share = static_cast<std::int64_t>(scaled / kFullAllocationBp);
    buckets.push_back({id, floor_share, static_cast<std::int64_t>(scaled % kFullAllocationBp)});
    assigned += floor_share;
  }
  // Map iteration is ascending by id, so a stable sort keeps ids ascending
  // among equal remainders.
  std::stable_sort(buckets.begin(), buckets.end(),
                   [](const Bucket& a, const Bucket& b) { return a.remainder > b.remainder; });
  std::int64_t leftover = amount.minor_units() - assigned;
  for (auto& b : buckets) {
    if (leftover == 0) break;
    ++b.floor_share;
    --leftover;
  }

  Allocation out;
  for (const auto& b : buckets) {
    if (b.floor_share > 0) out.emplace(b.id, Money{b.floor_share});
  }
  return Result::success(std::move(out));
}

// --- Service ---

InvestmentService::InvestmentService(const WalletStore& wallets, TransactionEngine& engine, const Clock& clock,
                                     IdSource& ids, BusinessCalendar calendar, RetryPolicy retry_policy)
    : wallets_(&wallets),
      engine_(&engine),
      clock_(&clock),
      ids_(&ids),
      calendar_(std::move(calendar)),
      retry_policy_(retry_policy) {}

Outcome<PolicyError, InvestmentPolicy> InvestmentService::set_policy(const CustomerId& customer,
                                                                     std::map<SubwalletId, int> allocations) {
  InvestmentPolicy policy{customer, std::move(allocations)};
  if (auto valid = validate_policy(policy, *wallets_); !valid) {
    return Outcome<PolicyError, InvestmentPolicy>::failure(valid.error());
  }
  policies_[customer] = policy;
  return Outcome<PolicyError, InvestmentPolicy>::success(std::move(policy));
}

const InvestmentPolicy* InvestmentService::policy(const CustomerId& customer) const {
  const auto it = policies_.find(customer);
  return it == policies_.end() ? nullptr : &it->second;
}

PendingRequest& InvestmentService::record(PendingRequest request) {
  requests_.push_back(std::move(request));
  return requests_.back();
}

Outcome<InvestError, PendingRequest> InvestmentService::invest(const CustomerId& customer, Money amount) {
  using Result = Outcome<InvestError, PendingRequest>;
  const Wallet* real_money = wallets_->wallet_of(customer, WalletType::RealMoney);
  if (real_money == nullptr) return Result::failure({InvestError::Kind::UnknownCustomer, {}, {}, customer.str()});
  const InvestmentPolicy* current = policy(customer);
  if (current == nullptr) return Result::failure({InvestError::Kind::PolicyNotFound, {}, {}, customer.str()});

  const auto& sub = real_money->primary_subwallet();
  const Transaction& hold = engine_->create_transaction(TransactionType::Hold, amount, Party::of(*real_money, sub),
                                                        Party::of(*real_money, sub));
  const TransactionId hold_id = hold.id;
  const auto processed = engine_->process_transaction(hold_id, retry_policy_);
  const Transaction& txn = processed.value();

  switch (txn.status) {
    case TransactionStatus::Completed: {
      auto split = allocate(amount, *current);
      PendingRequest request{RequestId{ids_->next("req")}, customer, RequestKind::Investment, amount, *current,
                             {hold_id}, std::move(split).value(), clock_->today(), RequestStatus::Pending, {}};
      return Result::success(record(std::move(request)));
    }
    case TransactionStatus::TransientError: {
      Allocation split;
      if (auto a = allocate(amount, *current)) split = std::move(a).value();
      awaiting_.push_back(AwaitingHold{hold_id, customer, amount, *current, std::move(split)});
      return Result::failure({InvestError::Kind::HoldTransient, {}, hold_id,
                              txn.last_error ? txn.last_error->code : std::string{}});
    }
    case TransactionStatus::Failed:
    case TransactionStatus::Processing:
      break;
  }
  std::optional<InvalidReason> reason;
  if (txn.last_error) reason = parse_invalid_reason(txn.last_error->code);
  return Result::failure({InvestError::Kind::HoldFailed, reason, hold_id, {}});
}

Outcome<InvestError, PendingRequest> InvestmentService::liquidate(const CustomerId& customer, Money amount) {
  using Result = Outcome<InvestError, PendingRequest>;
  const Wallet* investment = wallets_->wallet_of(customer, WalletType::Investment);
  if (investment == nullptr) return Result::failure({InvestError::Kind::UnknownCustomer, {}, {}, customer.str()});
  const InvestmentPolicy* current = policy(customer);
  if (current == nullptr) return Result::failure({InvestError::Kind::PolicyNotFound, {}, {}, customer.str()});

  auto split = allocate(amount, *current);
  if (!split) {
    const auto kind = split.error() == AllocationError::NonPositiveAmount ? InvestError::Kind::NonPositiveAmount
                                                                          : InvestError::Kind::InvalidPolicy;
    return Result::failure({kind, {}, {}, {}});
  }

  std::vector<TransactionId> holds;
  for (const auto& [subwallet_id, bucket] : split.value()) {
    const Party party = Party::wallet(investment->id, subwallet_id);
    holds.push_back(engine_->create_transaction(TransactionType::Hold, bucket, party, party).id);
  }
  const auto batch = engine_->create_batch(holds);
  const auto outcome = engine_->retry_batch(batch->id, retry_policy_);

  if (outcome->status == BatchStatus::Completed) {
    PendingRequest request{RequestId{ids_->next("req")}, customer, RequestKind::Liquidation, amount, *current,
                           holds, std::move(split).value(), clock_->today(), RequestStatus::Pending, {}};
    return Result::success(record(std::move(request)));
  }

  // The liquidation is dead: find what broke it and stop its holds from
  // being retried later.
  InvestError error{InvestError::Kind::BatchFailed, {}, {}, {}};
  for (const auto& id : holds) {
    const Transaction* txn = engine_->find(id);
    if (txn->status == TransactionStatus::Failed || txn->status == TransactionStatus::TransientError) {
      if (!error.transaction) {
        error.transaction = id;
        if (txn->last_error) {
          error.reason = parse_invalid_reason(txn->last_error->code);
          error.detail = txn->last_error->code;
        }
      }
      if (txn->status == TransactionStatus::TransientError) (void)engine_->abandon_transaction(id);
    }
  }
  return Result::failure(std::move(error));
}

std::optional<BatchId> InvestmentService::settlement_batch_for(PendingRequest& request) {
  if (request.settlement_batch) {
    const Batch* previous = engine_->find_batch(*request.settlement_batch);
    const bool reusable = previous != nullptr && std::none_of(previous->members.begin(), previous->members.end(),
                                                              [&](const TransactionId& id) {
                                                                return engine_->find(id)->status ==
                                                                       TransactionStatus::Failed;
                                                              });
    if (reusable) return request.settlement_batch;
  }

  const Wallet* real_money = wallets_->wallet_of(request.customer, WalletType::RealMoney);
  const Wallet* investment = wallets_->wallet_of(request.customer, WalletType::Investment);
  if (real_money == nullptr || investment == nullptr) return std::nullopt;
  const Party rm = Party::of(*real_money, real_money->primary_subwallet());

  std::vector<TransactionId> transfers;
  for (const auto& [subwallet_id, bucket] : request.per_subwallet_amounts) {
    const Party bucket_party = Party::wallet(investment->id, subwallet_id);
    const bool investing = request.kind == RequestKind::Investment;
    transfers.push_back(engine_
                            ->create_transaction(TransactionType::TransferFromHold, bucket,
                                                 investing ? rm : bucket_party, investing ? bucket_party : rm)
                            .id);
  }
  const auto batch = engine_->create_batch(transfers);
  if (!batch) return std::nullopt;
  request.settlement_batch = batch->id;
  return batch->id;
}

std::vector<SettlementResult> InvestmentService::settle(Date as_of) {
  std::vector<SettlementResult> results;
  const chr::sys_days cutoff{as_of};
  for (auto& request : requests_) {
    if (request.status != RequestStatus::Pending) continue;
    if (chr::sys_days{next_business_day(request.initiated_on, calendar_)} > cutoff) continue;

    SettlementResult result{request, false, settlement_batch_for(request)};
    if (result.batch) {
      const auto outcome = engine_->retry_batch(*result.batch, retry_policy_);
      if (outcome && outcome->status == BatchStatus::Completed) {
        request.status = RequestStatus::Settled;
        result.settled = true;
      }
    }
    result.request = request;
    results.push_back(std::move(result));
  }
  return results;
}

std::optional<PendingRequest> InvestmentService::on_transaction_updated(const Transaction& txn) {
  const auto it = std::find_if(awaiting_.begin(), awaiting_.end(),
                               [&](const AwaitingHold& a) { return a.hold_txn_id == txn.id; });
  if (it == awaiting_.end() || !is_terminal(txn.status)) return std::nullopt;

  PendingRequest request{RequestId{ids_->next("req")},
                         it->customer,
                         RequestKind::Investment,
                         it->amount,
                         it->policy_snapshot,
                         {txn.id},
                         it->per_subwallet_amounts,
                         clock_->today(),
                         txn.status == TransactionStatus::Completed ? RequestStatus::Pending : RequestStatus::Failed,
                         {}};
  awaiting_.erase(it);
  return record(std::move(request));
}

Outcome<std::string, Unit> InvestmentService::restore(std::map<CustomerId, InvestmentPolicy> policies,
                                                      std::vector<PendingRequest> requests,
                                                      std::vector<AwaitingHold> awaiting) {
  using Result = Outcome<std::string, Unit>;
  for (const auto& [customer, p] : policies) {
    if (p.customer != customer) return Result::failure("policy keyed under the wrong customer");
    if (auto valid = validate_policy(p, *wallets_); !valid) {
      return Result::failure("policy of " + customer.str() + ": " + describe(valid.error()));
    }
  }
  auto sums_to = [](const Allocation& a, Money amount) {
    Money total;
    for (const auto& [id, m] : a) total += m;
    return total == amount;
  };
  for (const auto& r : requests) {
    if (!sums_to(r.per_subwallet_amounts, r.amount)) {
      return Result::failure("request " + r.id.str() + " buckets do not sum to its amount");
    }
    for (const auto& id : r.hold_txn_ids) {
      if (engine_->find(id) == nullptr) return Result::failure("request " + r.id.str() + " references unknown hold");
    }
  }
  for (const auto& a : awaiting) {
    if (engine_->find(a.hold_txn_id) == nullptr) return Result::failure("awaiting hold references unknown transaction");
  }
  policies_ = std::move(policies);
  requests_ = std::move(requests);
  awaiting_ = std::move(awaiting);
  return Result::success({});
}

}  // namespace dwallet
