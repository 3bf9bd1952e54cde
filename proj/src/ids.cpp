#include "dwallet/ids.hpp"

#include <cstdio>

namespace dwallet {

std::string IdSource::next(const std::string& prefix) {
  const auto n = ++counters_[prefix];
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(n));
  return prefix + "-" + buf;
}

}  // namespace dwallet
