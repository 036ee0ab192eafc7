#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "syncscope/identifiers.hpp"
#include "syncscope/model.hpp"
#include "syncscope/profile.hpp"

namespace syncscope {

struct TokenOccurrence {
  std::uint64_t seq_no = 0;
  Location location = Location::QueryParam;
  Entity receiver;

  auto operator<=>(const TokenOccurrence&) const = default;
};

// An ID-looking token carried to several receivers by one user.
struct IdSharingEvent {
  std::string user_id;
  std::string token;
  std::vector<TokenOccurrence> occurrences;  // sorted, unique

  bool operator==(const IdSharingEvent&) const = default;
};

struct TwoPassResult {
  std::vector<IdSharingEvent> sharing;  // sorted by (user, token)
  std::vector<SyncEvent> events;
};

// Locations pass 1 of the two-pass method scans.
ScanLocationSet two_pass_locations(const Profile& profile);

// Exact-value matches of a user's identifiers in requests whose receiver
// entity differs from the identifier owner.
std::vector<SyncEvent> detect_shared(std::span<const Trace> traces, const IdentifierSets& identifiers,
                                     const Profile& profile, const Resources& resources,
                                     Diagnostics* diag = nullptr);

// Pass 1 tabulates ID-looking tokens in GET requests per user; tokens seen
// at two or more receivers (entities or requests, per profile) become
// IdSharingEvents. Pass 2 intersects them with the identifier sets.
TwoPassResult detect_two_pass(std::span<const Trace> traces, const IdentifierSets& identifiers,
                              const Profile& profile, const Resources& resources,
                              Diagnostics* diag = nullptr);

// Ordered (referrer entity, request entity) pairs.
using PairList = std::set<std::pair<std::string, std::string>>;

// TSV `referrer<TAB>request`; `#` comments and blank lines ignored.
PairList parse_pair_list(std::istream& in, std::string_view source = "<pairs>");
PairList load_pair_list(const std::filesystem::path& path);

std::vector<SyncEvent> detect_known_pairs(std::span<const Trace> traces, const PairList& pairs,
                                          const Profile& profile, const Resources& resources);

// Runs every detector enabled in the profile and normalizes the union.
std::vector<SyncEvent> detect_all(std::span<const Trace> traces, const IdentifierSets& identifiers,
                                  const Profile& profile, const Resources& resources,
                                  const PairList* pairs = nullptr, Diagnostics* diag = nullptr);

// {"user","seq","ts","value","sender","receiver","location","method",
//  "relation","mode"} per line.
void write_events_jsonl(std::ostream& out, std::span<const SyncEvent> events);
std::vector<SyncEvent> read_events_jsonl(std::istream& in, std::string_view source = "<events>");

}  // namespace syncscope
