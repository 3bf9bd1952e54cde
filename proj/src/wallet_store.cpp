#include "dwallet/wallet_store.hpp"

#include <set>

namespace dwallet {

std::string_view to_string(WalletStoreError e) {
  switch (e) {
    case WalletStoreError::DuplicateCustomer:
      return "DuplicateCustomer";
    case WalletStoreError::EmptyInvestmentOptions:
      return "EmptyInvestmentOptions";
    case WalletStoreError::EmptyCustomerId:
      return "EmptyCustomerId";
  }
  return "Unknown";
}

Outcome<WalletStoreError, CustomerWallets> WalletStore::create_customer_wallets(
    const CustomerId& customer, const std::vector<std::string>& investment_options) {
  using Result = Outcome<WalletStoreError, CustomerWallets>;
  if (customer.empty()) return Result::failure(WalletStoreError::EmptyCustomerId);
  if (has_customer(customer)) return Result::failure(WalletStoreError::DuplicateCustomer);
  if (investment_options.empty()) return Result::failure(WalletStoreError::EmptyInvestmentOptions);

  auto make = [&](WalletType type, const std::vector<std::string>& names) {
    Wallet w{WalletId{ids_->next("wal")}, customer, type, {}};
    for (const auto& name : names) {
      w.subwallets.push_back(Subwallet{SubwalletId{ids_->next("sw")}, w.id, name});
    }
    wallets_.push_back(std::move(w));
    index(wallets_.size() - 1);
    return wallets_.back();
  };

  CustomerWallets out{
      make(WalletType::RealMoney, {"realMoney"}),
      make(WalletType::EmergencyFunds, {"emergencyFunds"}),
      make(WalletType::Investment, investment_options),
  };
  return Result::success(std::move(out));
}

void WalletStore::index(std::size_t pos) {
  const Wallet& w = wallets_[pos];
  by_id_[w.id] = pos;
  for (const auto& s : w.subwallets) by_subwallet_[s.id] = pos;
  by_customer_[w.customer][w.wallet_type] = pos;
}

const Wallet* WalletStore::find_wallet(const WalletId& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &wallets_[it->second];
}

const Wallet* WalletStore::wallet_of(const CustomerId& customer, WalletType type) const {
  const auto c = by_customer_.find(customer);
  if (c == by_customer_.end()) return nullptr;
  const auto t = c->second.find(type);
  return t == c->second.end() ? nullptr : &wallets_[t->second];
}

const Wallet* WalletStore::owner_of(const SubwalletId& id) const {
  const auto it = by_subwallet_.find(id);
  return it == by_subwallet_.end() ? nullptr : &wallets_[it->second];
}

bool WalletStore::has_customer(const CustomerId& customer) const { return by_customer_.contains(customer); }

std::vector<CustomerId> WalletStore::customers() const {
  std::vector<CustomerId> out;
  std::set<CustomerId> seen;
  for (const auto& w : wallets_) {
    if (seen.insert(w.customer).second) out.push_back(w.customer);
  }
  return out;
}

std::vector<const Wallet*> WalletStore::wallets_of(const CustomerId& customer) const {
  std::vector<const Wallet*> out;
  for (const auto type : kAllWalletTypes) {
    if (const auto* w = wallet_of(customer, type)) out.push_back(w);
  }
  return out;
}

Outcome<std::string, Unit> WalletStore::restore(std::vector<Wallet> wallets) {
  using Result = Outcome<std::string, Unit>;
  std::set<WalletId> wallet_ids;
  std::set<SubwalletId> subwallet_ids;
  std::map<CustomerId, std::set<WalletType>> types;
  for (const auto& w : wallets) {
    if (w.id.empty() || w.customer.empty()) return Result::failure("wallet with empty id or customer");
    if (!wallet_ids.insert(w.id).second) return Result::failure("duplicate wallet id " + w.id.str());
    if (!types[w.customer].insert(w.wallet_type).second) {
      return Result::failure("customer " + w.customer.str() + " has two " + std::string(to_string(w.wallet_type)) +
                             " wallets");
    }
    const bool single = w.wallet_type != WalletType::Investment;
    if (w.subwallets.empty() || (single && w.subwallets.size() != 1)) {
      return Result::failure("wallet " + w.id.str() + " has a wrong number of subwallets");
    }
    for (const auto& s : w.subwallets) {
      if (s.id.empty() || s.wallet_id != w.id) return Result::failure("subwallet " + s.id.str() + " not owned by " + w.id.str());
      if (!subwallet_ids.insert(s.id).second) return Result::failure("duplicate subwallet id " + s.id.str());
    }
  }
  for (const auto& [customer, set] : types) {
    if (set.size() != std::size(kAllWalletTypes)) {
      return Result::failure("customer " + customer.str() + " lacks a wallet type");
    }
  }

  wallets_ = std::move(wallets);
  by_id_.clear();
  by_subwallet_.clear();
  by_customer_.clear();
  for (std::size_t i = 0; i < wallets_.size(); ++i) index(i);
  return Result::success({});
}

std::string describe(const PolicyError& e) {
  switch (e.kind) {
    case PolicyError::Kind::PolicySumInvalid:
      return "PolicySumInvalid(" + std::to_string(e.actual_sum) + ")";
    case PolicyError::Kind::ForeignSubwallet:
      return "ForeignSubwallet(" + e.subwallet.str() + ")";
    case PolicyError::Kind::NegativeAllocation:
      return "NegativeAllocation(" + e.subwallet.str() + ")";
    case PolicyError::Kind::UnknownCustomer:
      return "UnknownCustomer";
  }
  return "PolicyError";
}

Outcome<PolicyError, Unit> validate_policy(const InvestmentPolicy& policy, const WalletStore& wallets) {
  using Result = Outcome<PolicyError, Unit>;
  const Wallet* investment = wallets.wallet_of(policy.customer, WalletType::Investment);
  if (investment == nullptr) return Result::failure({PolicyError::Kind::UnknownCustomer, 0, {}});

  long long sum = 0;
  for (const auto& [subwallet, bp] : policy.allocations) {
    if (investment->find_subwallet(subwallet) == nullptr) {
      return Result::failure({PolicyError::Kind::ForeignSubwallet, 0, subwallet});
    }
    if (bp < 0) {
      return Result::failure({PolicyError::Kind::NegativeAllocation, 0, subwallet});
    }
    sum += bp;
  }
  if (sum != kFullAllocationBp) {
    return Result::failure({PolicyError::Kind::PolicySumInvalid, static_cast<int>(sum), {}});
  }
  return Result::success({});
}

}  // namespace dwallet
