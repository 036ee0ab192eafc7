#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace syncscope {

enum class SetMechanism { HttpResponse, HttpRequestEcho, JavaScript };

std::string_view to_string(SetMechanism mechanism);

// One key=value cookie observation. `owner` is the Domain attribute (leading
// dot stripped) when present, else the host that set or received it.
struct CookieRecord {
  std::string user_id;
  std::string owner;
  std::string key;
  std::string value;
  SetMechanism mechanism = SetMechanism::HttpResponse;
  std::optional<std::int64_t> expires_ms;
  std::optional<std::int64_t> max_age_s;
  std::int64_t set_at_ms = 0;

  // Max-Age takes precedence over Expires.
  std::optional<std::int64_t> effective_expiry_ms() const;
  bool has_expiry() const { return expires_ms.has_value() || max_age_s.has_value(); }

  bool operator==(const CookieRecord&) const = default;
};

// Accepts RFC 1123, RFC 850 and asctime dates, plus the common
// "Wdy, DD-Mon-YYYY HH:MM:SS GMT" variant. Milliseconds since the epoch.
std::optional<std::int64_t> parse_http_date(std::string_view text);

// Throws MalformedCookie when no '=' precedes the first ';'.
CookieRecord parse_set_cookie(std::string_view line, std::string_view request_host,
                              std::int64_t timestamp_ms, std::string_view user_id);

// Pairs without '=' are skipped and counted in *skipped.
std::vector<CookieRecord> parse_cookie_header(std::string_view line, std::string_view request_host,
                                              std::int64_t timestamp_ms, std::string_view user_id,
                                              std::size_t* skipped = nullptr);

}  // namespace syncscope
