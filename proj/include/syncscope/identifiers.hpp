#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "syncscope/cookie.hpp"
#include "syncscope/entity.hpp"
#include "syncscope/filters.hpp"
#include "syncscope/model.hpp"
#include "syncscope/profile.hpp"
#include "syncscope/public_suffix.hpp"

namespace syncscope {

// Lookup tables shared by extraction, labeling and detection.
struct Resources {
  PublicSuffixList psl;
  OrgMap orgs;
};

// All cookies observed for one user. Records are unique per
// (owner, key, value) and ordered by first observation.
struct CookieStore {
  std::vector<CookieRecord> records;
  KeyHistoryMap history;
};

// Set-Cookie, script and (when the profile allows) Cookie-header records.
// An echoed value is folded into the record of the cookie it echoes when
// the request host domain-matches that cookie's owner.
CookieStore build_cookie_store(const Trace& trace, const Profile& profile, const PublicSuffixList& psl,
                               Diagnostics* diag = nullptr);

struct Identifier {
  std::string value;
  Entity owner;
  std::string owner_host;
  std::string source_key;
  std::string user_id;
  std::vector<std::string> filter_trail;
  std::int64_t first_seen_ms = 0;

  bool operator==(const Identifier&) const = default;
};

using IdentifierSets = std::map<std::string, std::vector<Identifier>>;  // by user

// Candidate values surviving one pipeline stage, for one user.
struct StageSnapshot {
  std::string user_id;
  std::string stage;
  std::vector<std::string> values;
};

// Runs the filter chain in a fixed order: session, delimiter split, length,
// charset, multi/dynamic value, keyword, similarity, cross-user. Stages
// disabled by the profile are skipped and left out of the filter trail.
IdentifierSets extract_identifiers(std::span<const Trace> traces, const Profile& profile,
                                   const Resources& resources, Diagnostics* diag = nullptr,
                                   std::vector<StageSnapshot>* stages = nullptr);

// {"user","owner","key","value","filters":[...]} per line.
void write_identifiers_jsonl(std::ostream& out, const IdentifierSets& identifiers);

}  // namespace syncscope
