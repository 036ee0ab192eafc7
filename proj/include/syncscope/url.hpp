#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace syncscope {

using QueryPairs = std::vector<std::pair<std::string, std::string>>;

// A decomposed absolute URL. Path segments and query values are
// percent-decoded exactly once; `raw` keeps the original text.
struct UrlParts {
  std::string scheme;
  std::string host;
  std::optional<int> port;
  std::vector<std::string> path_segments;
  QueryPairs query_pairs;
  std::optional<std::string> fragment;
  std::string raw;

  // Compares the decomposed parts only; `raw` is not part of the identity.
  bool operator==(const UrlParts& other) const;
};

// Replaces each valid %HH triplet by its octet. Invalid triplets are kept
// verbatim. Single pass.
std::string percent_decode(std::string_view s);

// Splits on '&', then on the first '=', then decodes keys and values.
// Empty pieces are dropped.
QueryPairs parse_query(std::string_view query);

// Throws MalformedUrl when no scheme or authority can be recovered, or when
// an http(s) URL has an empty host.
UrlParts parse_url(std::string_view raw);
std::optional<UrlParts> try_parse_url(std::string_view raw);

// Resolves a possibly relative reference (as found in Location headers)
// against `base`.
UrlParts resolve_url(const UrlParts& base, std::string_view reference);

// Re-encodes the decoded parts so that parse_url(serialize(p)) == p.
std::string serialize(const UrlParts& parts);

bool is_ip_literal(std::string_view host);

std::string ascii_lower(std::string_view s);

}  // namespace syncscope
