#pragma once

#include <sstream>
#include <string>

#include "syncscope/identifiers.hpp"
#include "syncscope/ingest.hpp"

namespace testing_support {

inline std::vector<syncscope::Trace> traces_from(const std::string& jsonl) {
  std::istringstream in(jsonl);
  return syncscope::read_trace_jsonl(in).traces;
}

inline const syncscope::Resources& resources() {
  static const syncscope::Resources r = [] {
    syncscope::Resources res;
    res.psl = syncscope::PublicSuffixList::load(SYNCSCOPE_REPO_DATA_DIR "/public_suffix_list.dat");
    return res;
  }();
  return r;
}

inline syncscope::Profile preset(const char* name) { return *syncscope::builtin_profile(name); }

}  // namespace testing_support
