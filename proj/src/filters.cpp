#include "syncscope/filters.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "syncscope/similarity.hpp"
#include "syncscope/url.hpp"

namespace syncscope {

namespace {

constexpr std::string_view kDefaultKeywords = R"(# Consent-management cookies
euconsent
eupubconsent
__cmpconsnent
__cmpconsent
__cmpiab
consent
# Locale and region
locale
region
timezone
en-us
en_us
en-gb
en_gb
de-de
fr-fr
es-es
it-it
ja-jp
zh-cn
# URLs
http:
https:
http%3a
https%3a
www.
# File extensions
ext:.js
ext:.css
ext:.png
ext:.jpg
ext:.jpeg
ext:.gif
ext:.svg
ext:.webp
ext:.ico
ext:.html
)";

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

KeywordList KeywordList::defaults() {
  std::istringstream in{std::string(kDefaultKeywords)};
  return parse(in);
}

KeywordList KeywordList::parse(std::istream& in) {
  KeywordList list;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t begin = line.find_first_not_of(" \t");
    std::size_t end = line.find_last_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#')
      continue;
    std::string entry = ascii_lower(std::string_view(line).substr(begin, end - begin + 1));
    if (entry.rfind("ext:", 0) == 0) {
      std::string ext = entry.substr(4);
      if (!ext.empty() && ext.front() != '.')
        ext.insert(ext.begin(), '.');
      if (ext.size() > 1)
        list.extensions.push_back(std::move(ext));
    } else {
      list.substrings.push_back(std::move(entry));
    }
  }
  return list;
}

KeywordList KeywordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open keyword list " + path.string());
  return parse(in);
}

void FilterConfig::validate() const {
  if (max_len && *max_len < min_len)
    throw ConfigError("max_len must be >= min_len");
  if (similarity_threshold && (*similarity_threshold < 0.0 || *similarity_threshold > 1.0))
    throw ConfigError("similarity threshold must lie in [0, 1]");
  if (session.kind == SessionPolicy::Kind::DropExpiringBefore && session.days < 0)
    throw ConfigError("session expiry horizon must be non-negative");
}

std::vector<std::string> split_on_delimiters(std::string_view value, std::string_view delimiters,
                                             bool unwrap_pairs) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t end = delimiters.empty() ? std::string_view::npos
                                         : value.find_first_of(delimiters, start);
    std::string_view token = value.substr(start, end - start);
    if (unwrap_pairs) {
      if (std::size_t eq = token.find('='); eq != std::string_view::npos)
        token = token.substr(eq + 1);
    }
    if (!token.empty())
      tokens.emplace_back(token);
    if (end == std::string_view::npos)
      break;
    start = end + 1;
  }
  return tokens;
}

bool passes_length(std::string_view value, std::size_t min_len, std::optional<std::size_t> max_len) {
  return value.size() > min_len && (!max_len || value.size() <= *max_len);
}

bool passes_charset(std::string_view value, std::string_view allowed_extra) {
  return std::all_of(value.begin(), value.end(), [&](char c) {
    auto u = static_cast<unsigned char>(c);
    return (u < 0x80 && std::isalnum(u)) || allowed_extra.find(c) != std::string_view::npos;
  });
}

bool looks_like_date_or_timestamp(std::string_view value) {
  for (std::size_t i = 0; i + 10 <= value.size(); ++i) {
    std::string_view w = value.substr(i, 10);
    if (all_digits(w.substr(0, 4)) && (w[4] == '-' || w[4] == '/') && all_digits(w.substr(5, 2)) &&
        w[7] == w[4] && all_digits(w.substr(8, 2))) {
      int month = (w[5] - '0') * 10 + (w[6] - '0');
      int day = (w[8] - '0') * 10 + (w[9] - '0');
      if (month >= 1 && month <= 12 && day >= 1 && day <= 31)
        return true;
    }
  }
  // Epoch seconds or milliseconds between 2001 and 2033.
  if ((value.size() == 10 || value.size() == 13) && all_digits(value) && value.front() == '1')
    return true;
  return false;
}

bool hits_keyword(std::string_view value, const KeywordList& keywords, std::string_view key) {
  std::string lowered = ascii_lower(value);
  std::string lowered_key = ascii_lower(key);
  for (const std::string& needle : keywords.substrings) {
    if (lowered.find(needle) != std::string::npos)
      return true;
    if (!lowered_key.empty() && lowered_key.find(needle) != std::string::npos)
      return true;
  }
  for (const std::string& ext : keywords.extensions)
    if (lowered.size() >= ext.size() && lowered.compare(lowered.size() - ext.size(), ext.size(), ext) == 0)
      return true;
  return looks_like_date_or_timestamp(value);
}

std::vector<std::string> filter_length(std::span<const std::string> values, std::size_t min_len,
                                       std::optional<std::size_t> max_len) {
  std::vector<std::string> out;
  for (const auto& v : values)
    if (passes_length(v, min_len, max_len))
      out.push_back(v);
  return out;
}

std::vector<std::string> filter_charset(std::span<const std::string> values,
                                        std::string_view allowed_extra) {
  std::vector<std::string> out;
  for (const auto& v : values)
    if (passes_charset(v, allowed_extra))
      out.push_back(v);
  return out;
}

std::vector<std::string> filter_keywords(std::span<const std::string> values,
                                         const KeywordList& keywords) {
  std::vector<std::string> out;
  for (const auto& v : values)
    if (!hits_keyword(v, keywords))
      out.push_back(v);
  return out;
}

std::vector<std::string> filter_similarity(std::span<const std::string> values, double threshold) {
  std::vector<std::string> out;
  std::vector<std::string_view> kept;
  for (const auto& v : values) {
    bool repeat = std::find(kept.begin(), kept.end(), v) != kept.end();
    bool similar = !repeat && std::any_of(kept.begin(), kept.end(), [&](std::string_view w) {
      return ratcliff_obershelp(v, w) > threshold;
    });
    if (similar)
      continue;
    if (!repeat)
      kept.push_back(v);
    out.push_back(v);
  }
  return out;
}

bool key_is_unstable(const KeyHistory& history, bool drop_multi_value, bool drop_dynamic) {
  return (drop_multi_value && history.multi_value) || (drop_dynamic && history.values.size() > 1);
}

std::vector<std::string> filter_multi_value_keys(const KeyHistoryMap& histories, bool drop_multi_value,
                                                 bool drop_dynamic) {
  std::vector<std::string> out;
  for (const auto& [key, history] : histories) {
    if (key_is_unstable(history, drop_multi_value, drop_dynamic))
      continue;
    out.insert(out.end(), history.values.begin(), history.values.end());
  }
  return out;
}

bool passes_session(const CookieRecord& record, const SessionPolicy& policy,
                    std::int64_t reference_ms, bool echo_unknown_expiry_passes) {
  if (policy.kind == SessionPolicy::Kind::Keep)
    return true;
  if (!record.has_expiry())
    return record.mechanism == SetMechanism::HttpRequestEcho && echo_unknown_expiry_passes;
  if (policy.kind == SessionPolicy::Kind::DropNoExpiry)
    return true;
  std::int64_t horizon = reference_ms + static_cast<std::int64_t>(policy.days) * 86'400'000;
  auto expiry = record.effective_expiry_ms();
  return expiry && *expiry >= horizon;
}

std::vector<CookieRecord> filter_session(std::span<const CookieRecord> records,
                                         const SessionPolicy& policy, std::int64_t reference_ms,
                                         bool echo_unknown_expiry_passes) {
  std::vector<CookieRecord> out;
  for (const auto& r : records)
    if (passes_session(r, policy, reference_ms, echo_unknown_expiry_passes))
      out.push_back(r);
  return out;
}

std::map<std::string, std::vector<std::string>> filter_cross_user(
    const std::map<std::string, std::vector<std::string>>& per_user, Diagnostics* diag) {
  if (per_user.size() < 2) {
    warn(diag, "cross-user filter needs at least two users; skipped");
    return per_user;
  }
  std::map<std::string, std::set<std::string>> owners;
  for (const auto& [user, values] : per_user)
    for (const auto& v : values)
      owners[v].insert(user);
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [user, values] : per_user) {
    auto& kept = out[user];
    for (const auto& v : values)
      if (owners[v].size() < 2)
        kept.push_back(v);
  }
  return out;
}

}  // namespace syncscope
