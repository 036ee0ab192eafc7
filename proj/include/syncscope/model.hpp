#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "syncscope/entity.hpp"
#include "syncscope/url.hpp"

namespace syncscope {

// Header names are stored lowercase; values verbatim.
using HeaderList = std::vector<std::pair<std::string, std::string>>;

std::optional<std::string_view> find_header(const HeaderList& headers, std::string_view lower_name);

struct PostBody {
  std::string bytes;
  std::string content_type;

  bool operator==(const PostBody&) const = default;
};

// One request/response pair observed in the context of a first-party page.
// A response_status of 0 means no response was recorded.
struct HttpTransaction {
  std::uint64_t seq_no = 0;
  std::int64_t timestamp_ms = 0;
  std::string user_id;
  UrlParts landing_page;
  std::string method = "GET";
  UrlParts url;
  HeaderList request_headers;
  std::optional<UrlParts> referer;
  std::optional<PostBody> post_body;
  int response_status = 0;
  HeaderList response_headers;
  std::vector<std::string> set_cookie_lines;

  bool is_redirect() const { return response_status >= 300 && response_status < 400; }

  // Location header value, whatever the status.
  std::optional<std::string_view> location() const;

  // Location present on a non-3XX response.
  bool has_stray_location() const { return !is_redirect() && location().has_value(); }

  bool operator==(const HttpTransaction&) const = default;
};

struct JsCookieSet {
  std::int64_t timestamp_ms = 0;
  std::string frame_url;
  std::string cookie;

  bool operator==(const JsCookieSet&) const = default;
};

// Everything captured for one instrumented browser instance.
struct Trace {
  std::string user_id;
  std::vector<HttpTransaction> transactions;
  std::vector<JsCookieSet> js_cookie_sets;

  // Earliest timestamp in the trace, 0 when empty.
  std::int64_t start_time_ms() const;

  bool operator==(const Trace&) const = default;
};

enum class Location { QueryParam, Path, RefererUrl, RedirectLocation, NonstandardHeader, PostBody };

inline constexpr std::array<Location, 6> kAllLocations = {
    Location::QueryParam,       Location::Path,
    Location::RefererUrl,       Location::RedirectLocation,
    Location::NonstandardHeader, Location::PostBody};

std::string_view to_string(Location location);
std::optional<Location> location_from_string(std::string_view s);

enum class DetectionMethod { SharedIdHeuristic, TwoPassIdLooking, KnownPairList };

std::string_view to_string(DetectionMethod method);
std::optional<DetectionMethod> detection_method_from_string(std::string_view s);

// First-Party ID Leak when the shared identifier belongs to the landing
// page's entity, Third-Party ID Synchronization otherwise.
enum class Relation { FirstPartyLeak, ThirdPartySync };

std::string_view to_string(Relation relation);
std::optional<Relation> relation_from_string(std::string_view s);

struct IdentifierRef {
  std::string owner_host;
  std::string key;

  bool operator==(const IdentifierRef&) const = default;
};

struct SyncEvent {
  std::string user_id;
  std::uint64_t seq_no = 0;
  std::int64_t timestamp_ms = 0;
  std::string shared_value;
  Entity sender;
  Entity receiver;
  Location location = Location::QueryParam;
  DetectionMethod method = DetectionMethod::SharedIdHeuristic;
  Relation relation = Relation::ThirdPartySync;
  std::optional<IdentifierRef> matched_identifier;

  bool operator==(const SyncEvent&) const = default;
};

// Orders by (user, seq_no, method, location, value, sender, receiver).
bool event_less(const SyncEvent& a, const SyncEvent& b);

// Sorts and removes events sharing (user, seq_no, value, location, method).
void normalize_events(std::vector<SyncEvent>& events);

}  // namespace syncscope
