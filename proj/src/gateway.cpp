#include "dwallet/gateway.hpp"

#include <charconv>
#include <limits>
#include <numeric>

namespace dwallet {

std::string_view to_string(TransferDirection d) {
  return d == TransferDirection::Inbound ? "INBOUND" : "OUTBOUND";
}

std::optional<TransferDirection> parse_transfer_direction(std::string_view s) {
  if (s == "INBOUND") return TransferDirection::Inbound;
  if (s == "OUTBOUND") return TransferDirection::Outbound;
  return std::nullopt;
}

namespace {

std::optional<std::uint64_t> parse_digits(std::string_view s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<FaultProbability> FaultProbability::parse(std::string_view text) {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto n = parse_digits(text.substr(0, slash));
    const auto d = parse_digits(text.substr(slash + 1));
    if (!n || !d || *d == 0) return std::nullopt;
    num = *n;
    den = *d;
  } else if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = parse_digits(text.substr(0, dot));
    const auto frac_text = text.substr(dot + 1);
    const auto frac = parse_digits(frac_text);
    if (!whole || !frac || frac_text.size() > 17) return std::nullopt;
    for (std::size_t i = 0; i < frac_text.size(); ++i) den *= 10;
    if (*whole > 1) return std::nullopt;
    num = *whole * den + *frac;
  } else {
    const auto n = parse_digits(text);
    if (!n) return std::nullopt;
    num = *n;
  }
  if (num > den) return std::nullopt;
  const auto g = std::gcd(num, den);
  return FaultProbability{num / g, den / g};
}

std::string FaultProbability::to_string() const {
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

SimulatedGateway::SimulatedGateway(FaultConfig config) : config_(config), rng_(config.seed) {}

void SimulatedGateway::configure(FaultConfig config) {
  config_ = config;
  rng_.seed(config.seed);
}

bool SimulatedGateway::draw_failure() {
  const auto& p = config_.fail_probability;
  if (p.numerator == 0) return false;
  if (p.numerator >= p.denominator) return true;
  // Unbiased draw in [0, denominator) by rejection.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % p.denominator;
  std::uint64_t x = rng_();
  while (x >= limit) x = rng_();
  return x % p.denominator < p.numerator;
}

Outcome<TransientGatewayError, Confirmation> SimulatedGateway::external_transfer(const GatewayRequest& req) {
  bool fail = false;
  if (config_.fail_next_k > 0) {
    --config_.fail_next_k;
    fail = true;
  } else {
    fail = draw_failure();
  }

  GatewayCall call{GatewayCall::Kind::Transfer, req.request_id, req.direction, req.amount, req.external_ref,
                   !fail, {}};
  if (fail) {
    log_.push_back(std::move(call));
    return Outcome<TransientGatewayError, Confirmation>::failure(
        {req.request_id, "simulated partner API failure"});
  }
  call.token = "conf-" + std::to_string(next_token_++);
  ++compensable_[req.request_id];
  log_.push_back(call);
  return Outcome<TransientGatewayError, Confirmation>::success({call.token});
}

Outcome<CompensationError, Unit> SimulatedGateway::compensate(const TransactionId& request_id) {
  const auto it = compensable_.find(request_id);
  if (it == compensable_.end()) return Outcome<CompensationError, Unit>::failure(CompensationError::UnknownRequest);
  if (--it->second == 0) compensable_.erase(it);

  GatewayCall call{GatewayCall::Kind::Compensation, request_id, TransferDirection::Inbound, Money{}, {}, true, {}};
  // Mirror the direction and amount of the transfer being reversed.
  for (auto r = log_.rbegin(); r != log_.rend(); ++r) {
    if (r->kind == GatewayCall::Kind::Transfer && r->succeeded && r->request_id == request_id) {
      call.direction = r->direction == TransferDirection::Inbound ? TransferDirection::Outbound
                                                                   : TransferDirection::Inbound;
      call.amount = r->amount;
      call.external_ref = r->external_ref;
      call.token = r->token;
      break;
    }
  }
  log_.push_back(std::move(call));
  return Outcome<CompensationError, Unit>::success({});
}

void SimulatedGateway::restore_log(std::vector<GatewayCall> log) {
  log_ = std::move(log);
  compensable_.clear();
  next_token_ = 1;
  for (const auto& c : log_) {
    if (c.kind == GatewayCall::Kind::Transfer && c.succeeded) {
      ++compensable_[c.request_id];
      ++next_token_;
    } else if (c.kind == GatewayCall::Kind::Compensation) {
      if (auto it = compensable_.find(c.request_id); it != compensable_.end() && --it->second == 0) {
        compensable_.erase(it);
      }
    }
  }
}

}  // namespace dwallet
