#include "syncscope/scan.hpp"

#include <json.hpp>

namespace syncscope {

namespace {

class Harvester {
 public:
  Harvester(const FilterConfig& config, std::vector<ScanHit>& out) : config_(config), out_(out) {}

  // `text` is already decoded.
  void decoded(Location location, std::string_view text) {
    for (auto& token : split_on_delimiters(text, config_.delimiters, config_.unwraps_pairs()))
      out_.push_back({location, std::move(token)});
  }

  // `text` is raw; split first, then decode each token once.
  void raw(Location location, std::string_view text) {
    for (const auto& token : split_on_delimiters(text, config_.delimiters, config_.unwraps_pairs())) {
      std::string value = percent_decode(token);
      if (!value.empty())
        out_.push_back({location, std::move(value)});
    }
  }

  void url(Location location, const UrlParts& url) {
    for (const auto& segment : url.path_segments)
      decoded(location, segment);
    for (const auto& [key, value] : url.query_pairs)
      decoded(location, value);
  }

  void json_leaves(const nlohmann::json& node) {
    if (node.is_string()) {
      decoded(Location::PostBody, node.get_ref<const std::string&>());
    } else if (node.is_number_integer() || node.is_number_unsigned()) {
      decoded(Location::PostBody, node.dump());
    } else if (node.is_structured()) {
      for (const auto& child : node)
        json_leaves(child);
    }
  }

 private:
  const FilterConfig& config_;
  std::vector<ScanHit>& out_;
};

bool is_nonstandard(const std::string& name, const ScanLocationSet& locations) {
  // HTTP/2 pseudo-headers as recorded by browser exports.
  if (!name.empty() && name.front() == ':')
    return false;
  return locations.standard_headers.count(name) == 0;
}

}  // namespace

std::vector<ScanHit> scan_transaction(const HttpTransaction& tx, const ScanLocationSet& locations,
                                      const FilterConfig& config, Diagnostics* diag) {
  std::vector<ScanHit> hits;
  Harvester harvest(config, hits);

  if (locations.has(Location::QueryParam))
    for (const auto& [key, value] : tx.url.query_pairs)
      harvest.decoded(Location::QueryParam, value);

  if (locations.has(Location::Path))
    for (const auto& segment : tx.url.path_segments)
      harvest.decoded(Location::Path, segment);

  if (locations.has(Location::RefererUrl) && tx.referer)
    harvest.url(Location::RefererUrl, *tx.referer);

  if (locations.has(Location::RedirectLocation) && tx.is_redirect()) {
    if (auto location = tx.location()) {
      try {
        harvest.url(Location::RedirectLocation, resolve_url(tx.url, *location));
      } catch (const MalformedUrl&) {
        warn(diag, "unparseable Location \"" + std::string(*location) + "\" in " + tx.url.raw);
      }
    }
  }

  if (locations.has(Location::NonstandardHeader)) {
    for (const auto* headers : {&tx.request_headers, &tx.response_headers})
      for (const auto& [name, value] : *headers)
        if (is_nonstandard(name, locations))
          harvest.raw(Location::NonstandardHeader, value);
  }

  if (locations.has(Location::PostBody) && tx.post_body) {
    const std::string type = ascii_lower(tx.post_body->content_type);
    const std::string& body = tx.post_body->bytes;
    bool handled = false;
    if (type.find("application/x-www-form-urlencoded") != std::string::npos) {
      for (const auto& [key, value] : parse_query(body))
        harvest.decoded(Location::PostBody, value);
      handled = true;
    } else if (type.find("json") != std::string::npos) {
      auto parsed = nlohmann::json::parse(body, nullptr, false);
      if (!parsed.is_discarded()) {
        harvest.json_leaves(parsed);
        handled = true;
      }
    }
    if (!handled)
      harvest.raw(Location::PostBody, body);
  }
  return hits;
}

}  // namespace syncscope
