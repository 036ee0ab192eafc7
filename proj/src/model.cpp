#include "syncscope/model.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

namespace syncscope {

std::optional<std::string_view> find_header(const HeaderList& headers, std::string_view lower_name) {
  for (const auto& [name, value] : headers)
    if (name == lower_name)
      return std::string_view(value);
  return std::nullopt;
}

std::optional<std::string_view> HttpTransaction::location() const {
  return find_header(response_headers, "location");
}

std::int64_t Trace::start_time_ms() const {
  if (transactions.empty() && js_cookie_sets.empty())
    return 0;
  std::int64_t start = std::numeric_limits<std::int64_t>::max();
  for (const auto& tx : transactions)
    start = std::min(start, tx.timestamp_ms);
  for (const auto& js : js_cookie_sets)
    start = std::min(start, js.timestamp_ms);
  return start;
}

std::string_view to_string(Location location) {
  switch (location) {
    case Location::QueryParam:
      return "query_param";
    case Location::Path:
      return "path";
    case Location::RefererUrl:
      return "referer_url";
    case Location::RedirectLocation:
      return "redirect_location";
    case Location::NonstandardHeader:
      return "nonstandard_header";
    case Location::PostBody:
      return "post_body";
  }
  return "query_param";
}

std::optional<Location> location_from_string(std::string_view s) {
  for (Location location : kAllLocations)
    if (to_string(location) == s)
      return location;
  if (s == "params" || s == "query")
    return Location::QueryParam;
  if (s == "referer")
    return Location::RefererUrl;
  if (s == "location" || s == "redirect")
    return Location::RedirectLocation;
  if (s == "headers" || s == "header")
    return Location::NonstandardHeader;
  if (s == "post" || s == "body")
    return Location::PostBody;
  return std::nullopt;
}

std::string_view to_string(DetectionMethod method) {
  switch (method) {
    case DetectionMethod::SharedIdHeuristic:
      return "shared_id";
    case DetectionMethod::TwoPassIdLooking:
      return "two_pass";
    case DetectionMethod::KnownPairList:
      return "known_pairs";
  }
  return "shared_id";
}

std::optional<DetectionMethod> detection_method_from_string(std::string_view s) {
  if (s == "shared_id" || s == "shared")
    return DetectionMethod::SharedIdHeuristic;
  if (s == "two_pass" || s == "two-pass")
    return DetectionMethod::TwoPassIdLooking;
  if (s == "known_pairs" || s == "known-pairs")
    return DetectionMethod::KnownPairList;
  return std::nullopt;
}

std::string_view to_string(Relation relation) {
  return relation == Relation::FirstPartyLeak ? "first_party_leak" : "third_party_sync";
}

std::optional<Relation> relation_from_string(std::string_view s) {
  if (s == "first_party_leak")
    return Relation::FirstPartyLeak;
  if (s == "third_party_sync")
    return Relation::ThirdPartySync;
  return std::nullopt;
}

bool event_less(const SyncEvent& a, const SyncEvent& b) {
  return std::tie(a.user_id, a.seq_no, a.method, a.location, a.shared_value, a.sender, a.receiver) <
         std::tie(b.user_id, b.seq_no, b.method, b.location, b.shared_value, b.sender, b.receiver);
}

void normalize_events(std::vector<SyncEvent>& events) {
  std::sort(events.begin(), events.end(), event_less);
  auto same_key = [](const SyncEvent& a, const SyncEvent& b) {
    return a.user_id == b.user_id && a.seq_no == b.seq_no && a.method == b.method &&
           a.location == b.location && a.shared_value == b.shared_value;
  };
  events.erase(std::unique(events.begin(), events.end(), same_key), events.end());
}

}  // namespace syncscope
