#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dwallet/gateway.hpp"
#include "dwallet/system.hpp"

namespace dwallet {

struct SimulationConfig {
  std::uint64_t seed = 42;
  std::uint64_t ops = 1000;
  int customers = 4;
  /// When set, every fault reconfiguration uses this probability instead
  /// of a random one.
  std::optional<FaultProbability> fail_probability;
};

struct InvariantResult {
  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
  std::vector<std::string> samples;  // first few violation descriptions
};

struct SimulationReport {
  std::uint64_t seed = 0;
  std::uint64_t ops = 0;
  std::uint64_t attempted = 0;
  std::uint64_t completed = 0;
  std::uint64_t failed = 0;
  std::uint64_t transient = 0;
  std::map<std::string, std::uint64_t> per_operation;
  std::vector<InvariantResult> invariants;
  /// customer -> (available + holding) per wallet type
  std::map<std::string, std::map<std::string, std::int64_t>> final_balances;
  std::uint64_t ledger_entries = 0;

  [[nodiscard]] std::uint64_t total_violations() const;
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_text() const;
};

/// Seeded random workload over the whole engine, checking the ledger and
/// transaction invariants after every operation.
class Simulation {
 public:
  explicit Simulation(SimulationConfig config);
  ~Simulation();

  SimulationReport run();
  [[nodiscard]] const WalletSystem& system() const { return *system_; }

 private:
  struct Impl;
  SimulationConfig config_;
  std::unique_ptr<WalletSystem> system_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dwallet
