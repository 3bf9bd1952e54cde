#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dwallet/clock.hpp"
#include "dwallet/domain.hpp"
#include "dwallet/ledger.hpp"
#include "dwallet/outcome.hpp"
#include "dwallet/transactions.hpp"
#include "dwallet/wallet_store.hpp"

namespace dwallet {

/// Monday to Friday, minus an explicit holiday list.
class BusinessCalendar {
 public:
  BusinessCalendar() = default;
  explicit BusinessCalendar(std::set<std::chrono::sys_days> holidays) : holidays_(std::move(holidays)) {}

  /// One ISO date per line; blank lines and '#' comments ignored.
  static Outcome<std::string, BusinessCalendar> parse(std::string_view text);

  [[nodiscard]] bool is_business_day(Date d) const;
  [[nodiscard]] const std::set<std::chrono::sys_days>& holidays() const { return holidays_; }

 private:
  std::set<std::chrono::sys_days> holidays_;
};

/// Smallest date strictly after d that is a business day.
Date next_business_day(Date d, const BusinessCalendar& calendar);

using Allocation = std::map<SubwalletId, Money>;

enum class AllocationError { InvalidPolicy, NonPositiveAmount };
std::string_view to_string(AllocationError e);

/// Largest-remainder apportionment of amount by basis points. Each bucket
/// gets floor(amount * bp / 10000); the leftover units go one each to the
/// buckets with the largest fractional remainders, ties to the smaller
/// SubwalletId. Zero-bp buckets are omitted. The result sums to amount.
Outcome<AllocationError, Allocation> allocate(Money amount, const InvestmentPolicy& policy);

enum class RequestKind { Investment, Liquidation };
enum class RequestStatus { Pending, Settled, Failed };
std::string_view to_string(RequestKind k);
std::string_view to_string(RequestStatus s);
std::optional<RequestKind> parse_request_kind(std::string_view s);
std::optional<RequestStatus> parse_request_status(std::string_view s);

/// Investment or liquidation whose holds are placed and which waits for
/// settlement on a later business day.
struct PendingRequest {
  RequestId id;
  CustomerId customer;
  RequestKind kind = RequestKind::Investment;
  Money amount;
  InvestmentPolicy policy_snapshot;
  std::vector<TransactionId> hold_txn_ids;
  Allocation per_subwallet_amounts;
  Date initiated_on{};
  RequestStatus status = RequestStatus::Pending;
  /// Batch of the most recent settlement attempt.
  std::optional<BatchId> settlement_batch;

  friend bool operator==(const PendingRequest&, const PendingRequest&) = default;
};

/// An investment whose hold ended TransientError. It becomes a
/// PendingRequest once the hold completes on a later retry.
struct AwaitingHold {
  TransactionId hold_txn_id;
  CustomerId customer;
  Money amount;
  InvestmentPolicy policy_snapshot;
  Allocation per_subwallet_amounts;

  friend bool operator==(const AwaitingHold&, const AwaitingHold&) = default;
};

struct InvestError {
  enum class Kind {
    UnknownCustomer,
    PolicyNotFound,
    NonPositiveAmount,
    InvalidPolicy,
    HoldFailed,
    HoldTransient,
    BatchFailed,
  };
  Kind kind;
  std::optional<InvalidReason> reason;
  std::optional<TransactionId> transaction;
  std::string detail;
};
std::string_view to_string(InvestError::Kind k);
std::string describe(const InvestError& e);

struct SettlementResult {
  PendingRequest request;
  bool settled = false;
  std::optional<BatchId> batch;
};

class InvestmentService {
 public:
  InvestmentService(const WalletStore& wallets, TransactionEngine& engine, const Clock& clock, IdSource& ids,
                    BusinessCalendar calendar, RetryPolicy retry_policy);

  /// Validates and replaces the customer's policy. Pending requests keep
  /// their snapshots.
  Outcome<PolicyError, InvestmentPolicy> set_policy(const CustomerId& customer, std::map<SubwalletId, int> allocations);
  [[nodiscard]] const InvestmentPolicy* policy(const CustomerId& customer) const;

  /// A Hold on the RealMoney subwallet; on completion a Pending Investment
  /// request split by the current policy.
  Outcome<InvestError, PendingRequest> invest(const CustomerId& customer, Money amount);
  /// One Hold per nonzero bucket on the Investment subwallets, all or none.
  Outcome<InvestError, PendingRequest> liquidate(const CustomerId& customer, Money amount);

  /// Settles every Pending request initiated before the business day that
  /// as_of belongs to. One atomic batch of TransferFromHold per request;
  /// failures stay Pending for a later run.
  std::vector<SettlementResult> settle(Date as_of);

  /// Called after a standalone transaction changed status outside this
  /// service (retry or abandon). An awaiting investment hold that reached
  /// Completed becomes a Pending request; one that Failed is recorded as a
  /// Failed request.
  std::optional<PendingRequest> on_transaction_updated(const Transaction& txn);

  [[nodiscard]] const std::vector<PendingRequest>& requests() const { return requests_; }
  [[nodiscard]] const std::vector<AwaitingHold>& awaiting_holds() const { return awaiting_; }
  [[nodiscard]] const std::map<CustomerId, InvestmentPolicy>& policies() const { return policies_; }
  [[nodiscard]] const BusinessCalendar& calendar() const { return calendar_; }
  void set_calendar(BusinessCalendar calendar) { calendar_ = std::move(calendar); }
  void set_retry_policy(RetryPolicy p) { retry_policy_ = p; }

  Outcome<std::string, Unit> restore(std::map<CustomerId, InvestmentPolicy> policies,
                                     std::vector<PendingRequest> requests, std::vector<AwaitingHold> awaiting);

 private:
  PendingRequest& record(PendingRequest request);
  std::optional<BatchId> settlement_batch_for(PendingRequest& request);

  const WalletStore* wallets_;
  TransactionEngine* engine_;
  const Clock* clock_;
  IdSource* ids_;
  BusinessCalendar calendar_;
  RetryPolicy retry_policy_;
  std::map<CustomerId, InvestmentPolicy> policies_;
  std::vector<PendingRequest> requests_;
  std::vector<AwaitingHold> awaiting_;
};

}  // namespace dwallet
