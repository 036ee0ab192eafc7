#pragma once

#include <string>
#include <vector>

#include "syncscope/error.hpp"
#include "syncscope/filters.hpp"
#include "syncscope/model.hpp"
#include "syncscope/profile.hpp"

namespace syncscope {

struct ScanHit {
  Location location;
  std::string token;

  bool operator==(const ScanHit&) const = default;
};

// Harvests candidate values from every enabled location of one transaction.
// Only values are emitted, never query keys. Every token has been
// percent-decoded exactly once. Redirect targets are scanned on 3XX
// responses only; unparseable Location values are skipped with a warning.
std::vector<ScanHit> scan_transaction(const HttpTransaction& tx, const ScanLocationSet& locations,
                                      const FilterConfig& config, Diagnostics* diag = nullptr);

}  // namespace syncscope
