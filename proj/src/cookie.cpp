#include "syncscope/cookie.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <chrono>

#include "syncscope/error.hpp"
#include "syncscope/url.hpp"

namespace syncscope {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return value;
}

std::optional<int> month_index(std::string_view name) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  std::string lowered = ascii_lower(name.substr(0, 3));
  for (std::size_t i = 0; i < kMonths.size(); ++i)
    if (kMonths[i] == lowered)
      return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::optional<std::array<int, 3>> parse_clock(std::string_view s) {
  std::size_t c1 = s.find(':');
  std::size_t c2 = s.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
  if (c1 == std::string_view::npos || c2 == std::string_view::npos)
    return std::nullopt;
  auto h = parse_int(s.substr(0, c1));
  auto m = parse_int(s.substr(c1 + 1, c2 - c1 - 1));
  auto sec = parse_int(s.substr(c2 + 1));
  if (!h || !m || !sec || *h > 23 || *m > 59 || *sec > 60)
    return std::nullopt;
  return std::array<int, 3>{*h, *m, *sec};
}

std::optional<std::int64_t> to_epoch_ms(int year, int month, int day, std::array<int, 3> clock) {
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok())
    return std::nullopt;
  auto tp = sys_days{ymd} + hours{clock[0]} + minutes{clock[1]} + seconds{clock[2]};
  return duration_cast<milliseconds>(tp.time_since_epoch()).count();
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ','))
      ++i;
    std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',')
      ++i;
    if (i > start)
      parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

int expand_year(int year) {
  if (year < 70)
    return year + 2000;
  if (year < 100)
    return year + 1900;
  return year;
}

}  // namespace

std::string_view to_string(SetMechanism mechanism) {
  switch (mechanism) {
    case SetMechanism::HttpResponse:
      return "http_response";
    case SetMechanism::HttpRequestEcho:
      return "request_echo";
    case SetMechanism::JavaScript:
      return "javascript";
  }
  return "http_response";
}

std::optional<std::int64_t> CookieRecord::effective_expiry_ms() const {
  if (max_age_s)
    return set_at_ms + *max_age_s * 1000;
  return expires_ms;
}

std::optional<std::int64_t> parse_http_date(std::string_view text) {
  std::vector<std::string_view> parts = split_ws(trim(text));
  if (parts.empty())
    return std::nullopt;

  // asctime: Wdy Mon DD HH:MM:SS YYYY
  if (parts.size() == 5 && month_index(parts[1]) && parts[1].size() == 3) {
    auto day = parse_int(parts[2]);
    auto clock = parse_clock(parts[3]);
    auto year = parse_int(parts[4]);
    if (day && clock && year)
      return to_epoch_ms(*year, *month_index(parts[1]), *day, *clock);
    return std::nullopt;
  }

  // RFC 1123: Wdy DD Mon YYYY HH:MM:SS GMT
  if (parts.size() >= 5 && parts.size() <= 6 && parse_int(parts[1])) {
    auto day = parse_int(parts[1]);
    auto month = month_index(parts[2]);
    auto year = parse_int(parts[3]);
    auto clock = parse_clock(parts[4]);
    if (day && month && year && clock)
      return to_epoch_ms(expand_year(*year), *month, *day, *clock);
    return std::nullopt;
  }

  // RFC 850 and the Netscape variant: Weekday DD-Mon-YY[YY] HH:MM:SS GMT
  if (parts.size() >= 3 && parts.size() <= 4) {
    std::string_view date = parts[1];
    std::size_t d1 = date.find('-');
    std::size_t d2 = date.find('-', d1 == std::string_view::npos ? d1 : d1 + 1);
    if (d1 == std::string_view::npos || d2 == std::string_view::npos)
      return std::nullopt;
    auto day = parse_int(date.substr(0, d1));
    auto month = month_index(date.substr(d1 + 1, d2 - d1 - 1));
    auto year = parse_int(date.substr(d2 + 1));
    auto clock = parse_clock(parts[2]);
    if (day && month && year && clock)
      return to_epoch_ms(expand_year(*year), *month, *day, *clock);
  }
  return std::nullopt;
}

CookieRecord parse_set_cookie(std::string_view line, std::string_view request_host,
                              std::int64_t timestamp_ms, std::string_view user_id) {
  std::size_t semi = line.find(';');
  std::string_view pair = line.substr(0, semi);
  std::size_t eq = pair.find('=');
  if (eq == std::string_view::npos)
    throw MalformedCookie("no key=value pair in cookie: " + std::string(line));
  std::string_view key = trim(pair.substr(0, eq));
  if (key.empty())
    throw MalformedCookie("empty cookie name: " + std::string(line));

  CookieRecord record;
  record.user_id = std::string(user_id);
  record.key = std::string(key);
  record.value = std::string(trim(pair.substr(eq + 1)));
  record.mechanism = SetMechanism::HttpResponse;
  record.set_at_ms = timestamp_ms;
  record.owner = ascii_lower(request_host);

  while (semi != std::string_view::npos) {
    std::size_t next = line.find(';', semi + 1);
    std::string_view attr = trim(line.substr(semi + 1, next - semi - 1));
    semi = next;
    std::size_t attr_eq = attr.find('=');
    std::string name = ascii_lower(trim(attr.substr(0, attr_eq)));
    std::string_view value =
        attr_eq == std::string_view::npos ? std::string_view() : trim(attr.substr(attr_eq + 1));
    if (name == "expires") {
      record.expires_ms = parse_http_date(value);
    } else if (name == "max-age") {
      std::int64_t seconds = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seconds);
      if (ec == std::errc() && ptr == value.data() + value.size() && !value.empty())
        record.max_age_s = seconds;
    } else if (name == "domain") {
      while (!value.empty() && value.front() == '.')
        value.remove_prefix(1);
      if (!value.empty())
        record.owner = ascii_lower(value);
    }
  }
  return record;
}

std::vector<CookieRecord> parse_cookie_header(std::string_view line, std::string_view request_host,
                                              std::int64_t timestamp_ms, std::string_view user_id,
                                              std::size_t* skipped) {
  std::vector<CookieRecord> records;
  std::size_t start = 0;
  while (start < line.size()) {
    std::size_t semi = line.find(';', start);
    std::string_view piece = trim(line.substr(start, semi - start));
    start = semi == std::string_view::npos ? line.size() : semi + 1;
    if (piece.empty())
      continue;
    std::size_t eq = piece.find('=');
    if (eq == std::string_view::npos || trim(piece.substr(0, eq)).empty()) {
      if (skipped)
        ++*skipped;
      continue;
    }
    CookieRecord record;
    record.user_id = std::string(user_id);
    record.owner = ascii_lower(request_host);
    record.key = std::string(trim(piece.substr(0, eq)));
    record.value = std::string(trim(piece.substr(eq + 1)));
    record.mechanism = SetMechanism::HttpRequestEcho;
    record.set_at_ms = timestamp_ms;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace syncscope
