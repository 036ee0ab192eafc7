#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncscope/cookie.hpp"
#include "syncscope/error.hpp"

namespace syncscope {

// Substring and file-extension blocklist for the keyword filter.
struct KeywordList {
  std::vector<std::string> substrings;  // lowercase
  std::vector<std::string> extensions;  // lowercase, with leading '.'

  // Consent-string cookie names, locale/region/URL markers and common file
  // extensions.
  static KeywordList defaults();

  // One lowercase entry per line; `ext:` marks a file extension; `#` starts
  // a comment.
  static KeywordList parse(std::istream& in);
  static KeywordList load(const std::filesystem::path& path);

  bool operator==(const KeywordList&) const = default;
};

struct SessionPolicy {
  enum class Kind { Keep, DropNoExpiry, DropExpiringBefore };
  Kind kind = Kind::Keep;
  int days = 0;  // DropExpiringBefore only

  bool operator==(const SessionPolicy&) const = default;
};

struct FilterConfig {
  // Exclusive lower bound on length.
  std::size_t min_len = 0;
  // Inclusive upper bound.
  std::optional<std::size_t> max_len;
  // When set, values must consist of ASCII alphanumerics plus these.
  std::optional<std::string> charset_extra;
  std::string delimiters;
  // Values STRICTLY more similar than this to an earlier kept value are
  // dropped.
  std::optional<double> similarity_threshold;
  bool drop_multi_value_keys = false;
  bool drop_dynamic_keys = false;
  // Keyword filter is enabled when set.
  std::optional<KeywordList> keywords;
  bool cross_user_dedup = false;
  SessionPolicy session;

  // Throws ConfigError.
  void validate() const;

  // Whether a delimiter-split token "k=v" is unwrapped to "v".
  bool unwraps_pairs() const {
    return !charset_extra || charset_extra->find('=') == std::string::npos;
  }

  bool operator==(const FilterConfig&) const = default;
};

// Splits at every delimiter, drops empty tokens, and when `unwrap_pairs`
// replaces a "key=value" token by its value.
std::vector<std::string> split_on_delimiters(std::string_view value, std::string_view delimiters,
                                             bool unwrap_pairs = true);

bool passes_length(std::string_view value, std::size_t min_len, std::optional<std::size_t> max_len);
bool passes_charset(std::string_view value, std::string_view allowed_extra);

// ISO dates (YYYY-MM-DD) and 10/13 digit epoch timestamps.
bool looks_like_date_or_timestamp(std::string_view value);

// True when the value (or its cookie key) contains a blocklisted substring,
// looks like a date or timestamp, or ends in a blocklisted extension.
bool hits_keyword(std::string_view value, const KeywordList& keywords, std::string_view key = {});

std::vector<std::string> filter_length(std::span<const std::string> values, std::size_t min_len,
                                       std::optional<std::size_t> max_len);
std::vector<std::string> filter_charset(std::span<const std::string> values,
                                        std::string_view allowed_extra);
std::vector<std::string> filter_keywords(std::span<const std::string> values,
                                         const KeywordList& keywords);

// `values` in first-seen order. A value is dropped when its similarity to
// an already kept, different value exceeds `threshold`; repeats of a kept
// value are kept.
std::vector<std::string> filter_similarity(std::span<const std::string> values, double threshold);

// Distinct raw values of one (owner, key) cookie, in order of first
// appearance, and whether one set event carried several values.
struct KeyHistory {
  std::vector<std::string> values;
  bool multi_value = false;

  bool operator==(const KeyHistory&) const = default;
};

using CookieKey = std::pair<std::string, std::string>;  // (owner, key)
using KeyHistoryMap = std::map<CookieKey, KeyHistory>;

bool key_is_unstable(const KeyHistory& history, bool drop_multi_value, bool drop_dynamic);

// Values of every key that is neither multi-valued nor dynamic.
std::vector<std::string> filter_multi_value_keys(const KeyHistoryMap& histories, bool drop_multi_value,
                                                 bool drop_dynamic);

// `reference_ms` is the trace start. Echoed cookies with unknown expiry pass
// when `echo_unknown_expiry_passes`.
bool passes_session(const CookieRecord& record, const SessionPolicy& policy,
                    std::int64_t reference_ms, bool echo_unknown_expiry_passes = true);
std::vector<CookieRecord> filter_session(std::span<const CookieRecord> records,
                                         const SessionPolicy& policy, std::int64_t reference_ms,
                                         bool echo_unknown_expiry_passes = true);

// Drops values present in two or more users' sets. With fewer than two
// users the input is returned unchanged and a warning is recorded.
std::map<std::string, std::vector<std::string>> filter_cross_user(
    const std::map<std::string, std::vector<std::string>>& per_user, Diagnostics* diag = nullptr);

}  // namespace syncscope
