#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dwallet/domain.hpp"
#include "dwallet/outcome.hpp"

namespace dwallet {

enum class TransferDirection { Inbound, Outbound };
std::string_view to_string(TransferDirection d);
std::optional<TransferDirection> parse_transfer_direction(std::string_view s);

struct GatewayRequest {
  TransferDirection direction = TransferDirection::Inbound;
  Money amount;
  std::string external_ref;
  TransactionId request_id;
};

struct TransientGatewayError {
  TransactionId request_id;
  std::string detail;
};

struct Confirmation {
  std::string token;
};

enum class CompensationError { UnknownRequest };

/// Third-party bank API. Callers serialize calls per instance.
class BankGateway {
 public:
  virtual ~BankGateway() = default;
  virtual Outcome<TransientGatewayError, Confirmation> external_transfer(const GatewayRequest& req) = 0;
  /// Reverses one earlier successful transfer for request_id.
  virtual Outcome<CompensationError, Unit> compensate(const TransactionId& request_id) = 0;
};

/// Fault probability as an exact fraction numerator/denominator.
struct FaultProbability {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  /// "0", "1", "0.25", "1/3". Rejects values outside [0,1].
  static std::optional<FaultProbability> parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  friend bool operator==(const FaultProbability&, const FaultProbability&) = default;
};

struct FaultConfig {
  std::uint64_t fail_next_k = 0;
  FaultProbability fail_probability;
  std::uint64_t seed = 0;
};

struct GatewayCall {
  enum class Kind { Transfer, Compensation };
  Kind kind = Kind::Transfer;
  TransactionId request_id;
  TransferDirection direction = TransferDirection::Inbound;
  Money amount;
  std::string external_ref;
  bool succeeded = false;
  std::string token;  // confirmation token when succeeded

  friend bool operator==(const GatewayCall&, const GatewayCall&) = default;
};

/// In-process gateway with deterministic fault injection: a call fails when
/// a fail_next_k credit is left (consuming it), otherwise when a draw from a
/// seeded mt19937_64 falls below fail_probability.
class SimulatedGateway final : public BankGateway {
 public:
  explicit SimulatedGateway(FaultConfig config = {});

  Outcome<TransientGatewayError, Confirmation> external_transfer(const GatewayRequest& req) override;
  Outcome<CompensationError, Unit> compensate(const TransactionId& request_id) override;

  /// Replaces the fault configuration and reseeds the generator.
  void configure(FaultConfig config);
  [[nodiscard]] const FaultConfig& config() const { return config_; }

  [[nodiscard]] const std::vector<GatewayCall>& call_log() const { return log_; }
  /// Restores a persisted call log (and the set of compensable transfers).
  void restore_log(std::vector<GatewayCall> log);

 private:
  bool draw_failure();

  FaultConfig config_;
  std::mt19937_64 rng_;
  std::vector<GatewayCall> log_;
  std::map<TransactionId, int> compensable_;
  std::uint64_t next_token_ = 1;
};

}  // namespace dwallet
