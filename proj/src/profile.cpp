#include "syncscope/profile.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

namespace syncscope {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string_view item = trim(s.substr(start, comma - start));
    if (!item.empty())
      items.push_back(item);
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return items;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "yes" || value == "1")
    return true;
  if (value == "false" || value == "off" || value == "no" || value == "0")
    return false;
  throw ConfigError("expected a boolean for " + std::string(key) + ", got \"" + std::string(value) + "\"");
}

std::size_t parse_size(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("expected a non-negative integer for " + std::string(key));
  return out;
}

double parse_fraction(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    double out = std::stod(std::string(value), &used);
    if (used != value.size())
      throw ConfigError("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("expected a number for " + std::string(key));
  }
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

std::string format_fraction(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

Profile make_preset(std::string_view name) {
  Profile p;
  p.name = std::string(name);
  FilterConfig& f = p.filters;
  using SP = SessionPolicy::Kind;
  if (name == "olejnik2014") {
    f.min_len = 10;
    p.locations = ScanLocationSet::of({Location::QueryParam});
    p.party_strategy = PartyStrategy::StringMatch;
  } else if (name == "acar2014") {
    f.delimiters = "&;";
    f.similarity_threshold = 0.33;
    f.drop_dynamic_keys = true;
    f.session = {SP::DropExpiringBefore, 30};
    p.locations = ScanLocationSet::of(
        {Location::QueryParam, Location::Path, Location::RefererUrl, Location::RedirectLocation});
  } else if (name == "englehardt2016") {
    f.min_len = 7;
    f.max_len = 100;
    f.charset_extra = "-_=";
    f.delimiters = "&;";
    f.similarity_threshold = 0.66;
    f.drop_dynamic_keys = true;
    f.session = {SP::DropExpiringBefore, 90};
    p.locations = ScanLocationSet::of(
        {Location::QueryParam, Location::Path, Location::RefererUrl, Location::RedirectLocation});
  } else if (name == "fouad2020") {
    f.charset_extra = "-_,.";
    f.delimiters = "&;";
    f.cross_user_dedup = true;
    p.locations = ScanLocationSet::of({Location::QueryParam});
  } else if (name == "papadogiannakis2021") {
    f.min_len = 5;
    f.delimiters = "&;";
    f.keywords = KeywordList::defaults();
    p.locations = ScanLocationSet::of(
        {Location::QueryParam, Location::Path, Location::RefererUrl, Location::PostBody});
    p.party_strategy = PartyStrategy::StringMatch;
  } else if (name == "papadopoulos2019") {
    f.min_len = 10;
    f.delimiters = "&;";
    f.cross_user_dedup = true;
    f.session = {SP::DropNoExpiry, 0};
    p.locations = ScanLocationSet::of({Location::QueryParam, Location::Path, Location::RefererUrl});
    p.party_strategy = PartyStrategy::Organization;
    p.detectors = {false, true, false};
  } else if (name == "nonstandard_headers") {
    f.min_len = 8;
    f.charset_extra = "-_=";
    f.delimiters = "&;";
    p.locations = ScanLocationSet::of(
        {Location::QueryParam, Location::Path, Location::NonstandardHeader});
  } else if (name == "ghosh2015") {
    f.delimiters = "&:";
    p.locations = ScanLocationSet::of({Location::QueryParam});
  }
  p.entity_mode = entity_mode_for(p.party_strategy);
  return p;
}

}  // namespace

ScanLocationSet ScanLocationSet::all() {
  ScanLocationSet set;
  set.flags.set();
  return set;
}

ScanLocationSet ScanLocationSet::of(std::initializer_list<Location> locations) {
  ScanLocationSet set;
  for (Location l : locations)
    set.set(l);
  return set;
}

std::set<std::string> ScanLocationSet::default_standard_headers() {
  return {
      "accept", "accept-ch", "accept-charset", "accept-encoding", "accept-language",
      "accept-ranges", "access-control-allow-credentials", "access-control-allow-headers",
      "access-control-allow-methods", "access-control-allow-origin",
      "access-control-expose-headers", "access-control-max-age",
      "access-control-request-headers", "access-control-request-method", "age", "alt-svc",
      "authorization", "cache-control", "connection", "content-disposition",
      "content-encoding", "content-language", "content-length", "content-location",
      "content-range", "content-security-policy", "content-type", "cookie",
      "cross-origin-opener-policy", "cross-origin-resource-policy", "date", "dnt", "etag",
      "expect", "expires", "host", "if-match", "if-modified-since", "if-none-match",
      "if-range", "if-unmodified-since", "keep-alive", "last-modified", "link", "location",
      "origin", "p3p", "permissions-policy", "pragma", "priority", "proxy-authenticate",
      "proxy-authorization", "range", "referer", "referrer-policy", "retry-after",
      "sec-ch-ua", "sec-ch-ua-mobile", "sec-ch-ua-platform", "sec-fetch-dest",
      "sec-fetch-mode", "sec-fetch-site", "sec-fetch-user", "server", "server-timing",
      "set-cookie", "strict-transport-security", "te", "timing-allow-origin", "trailer",
      "transfer-encoding", "upgrade", "upgrade-insecure-requests", "user-agent", "vary",
      "via", "www-authenticate", "x-content-type-options", "x-frame-options",
      "x-xss-protection"};
}

std::string_view to_string(PartyStrategy strategy) {
  switch (strategy) {
    case PartyStrategy::StringMatch:
      return "string";
    case PartyStrategy::Etld1:
      return "etld1";
    case PartyStrategy::Organization:
      return "org";
  }
  return "etld1";
}

std::optional<PartyStrategy> party_strategy_from_string(std::string_view s) {
  if (s == "string" || s == "domain")
    return PartyStrategy::StringMatch;
  if (s == "etld1")
    return PartyStrategy::Etld1;
  if (s == "org" || s == "organization")
    return PartyStrategy::Organization;
  return std::nullopt;
}

EntityMode entity_mode_for(PartyStrategy strategy) {
  switch (strategy) {
    case PartyStrategy::StringMatch:
      return EntityMode::Domain;
    case PartyStrategy::Etld1:
      return EntityMode::Etld1;
    case PartyStrategy::Organization:
      return EntityMode::Organization;
  }
  return EntityMode::Etld1;
}

void Profile::validate() const {
  filters.validate();
  if (!locations.any())
    throw ConfigError("profile " + name + " scans no locations");
  if (!detectors.shared && !detectors.two_pass && !detectors.known_pairs)
    throw ConfigError("profile " + name + " selects no detectors");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {
      "olejnik2014",         "acar2014",         "englehardt2016", "fouad2020",
      "papadogiannakis2021", "papadopoulos2019", "nonstandard_headers",   "ghosh2015"};
  return kNames;
}

std::optional<Profile> builtin_profile(std::string_view name) {
  for (const auto& preset : preset_names())
    if (preset == name)
      return make_preset(name);
  return std::nullopt;
}

void apply_setting(Profile& p, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  FilterConfig& f = p.filters;
  if (key == "name") {
    p.name = std::string(value);
  } else if (key == "min_len") {
    f.min_len = parse_size(key, value);
  } else if (key == "max_len") {
    f.max_len = value == "none" ? std::nullopt : std::optional(parse_size(key, value));
  } else if (key == "charset_extra") {
    f.charset_extra = value == "none" ? std::nullopt : std::optional(std::string(value));
  } else if (key == "charset") {
    // "alnum" or "alnum+<chars>"
    if (value == "any")
      f.charset_extra.reset();
    else if (value == "alnum")
      f.charset_extra = "";
    else if (value.substr(0, 6) == "alnum+")
      f.charset_extra = std::string(value.substr(6));
    else
      throw ConfigError("charset must be any, alnum or alnum+<chars>");
  } else if (key == "delimiters") {
    f.delimiters = value == "none" ? std::string() : std::string(value);
  } else if (key == "similarity") {
    f.similarity_threshold =
        value == "none" ? std::nullopt : std::optional(parse_fraction(key, value));
  } else if (key == "similarity_scope") {
    if (value == "all")
      p.similarity_scope = SimilarityScope::AllWithinUser;
    else if (value == "same_owner")
      p.similarity_scope = SimilarityScope::SameOwner;
    else
      throw ConfigError("similarity_scope must be all or same_owner");
  } else if (key == "drop_multi_value_keys") {
    f.drop_multi_value_keys = parse_bool(key, value);
  } else if (key == "drop_dynamic_keys") {
    f.drop_dynamic_keys = parse_bool(key, value);
  } else if (key == "keywords") {
    if (value == "off" || value == "false")
      f.keywords.reset();
    else if (value == "default" || value == "on" || value == "true")
      f.keywords = KeywordList::defaults();
    else
      f.keywords = KeywordList::load(std::string(value));
  } else if (key == "cross_user_dedup") {
    f.cross_user_dedup = parse_bool(key, value);
  } else if (key == "session") {
    if (value == "keep") {
      f.session = {SessionPolicy::Kind::Keep, 0};
    } else if (value == "drop_no_expiry") {
      f.session = {SessionPolicy::Kind::DropNoExpiry, 0};
    } else if (value.substr(0, 21) == "drop_expiring_before:") {
      f.session = {SessionPolicy::Kind::DropExpiringBefore,
                   static_cast<int>(parse_size(key, value.substr(21)))};
    } else {
      throw ConfigError("session must be keep, drop_no_expiry or drop_expiring_before:<days>");
    }
  } else if (key == "include_request_echo") {
    p.include_request_echo = parse_bool(key, value);
  } else if (key == "echo_unknown_expiry_passes") {
    p.echo_unknown_expiry_passes = parse_bool(key, value);
  } else if (key == "locations") {
    ScanLocationSet locations;
    locations.standard_headers = p.locations.standard_headers;
    for (std::string_view item : split_list(value)) {
      if (item == "all") {
        locations.flags.set();
        continue;
      }
      auto location = location_from_string(item);
      if (!location)
        throw ConfigError("unknown location " + std::string(item));
      locations.set(*location);
    }
    p.locations = std::move(locations);
  } else if (key == "entity_mode") {
    auto mode = entity_mode_from_string(value);
    if (!mode)
      throw ConfigError("entity_mode must be domain, etld1 or org");
    p.entity_mode = *mode;
  } else if (key == "party_strategy" || key == "party_mode") {
    auto strategy = party_strategy_from_string(value);
    if (!strategy)
      throw ConfigError("party_strategy must be string, etld1 or org");
    p.party_strategy = *strategy;
    if (key == "party_mode")
      p.entity_mode = entity_mode_for(*strategy);
  } else if (key == "require_third_party_receiver") {
    p.require_third_party_receiver = parse_bool(key, value);
  } else if (key == "detectors") {
    DetectorSet detectors{false, false, false};
    for (std::string_view item : split_list(value)) {
      auto method = detection_method_from_string(item);
      if (!method)
        throw ConfigError("unknown detector " + std::string(item));
      detectors.shared |= *method == DetectionMethod::SharedIdHeuristic;
      detectors.two_pass |= *method == DetectionMethod::TwoPassIdLooking;
      detectors.known_pairs |= *method == DetectionMethod::KnownPairList;
    }
    p.detectors = detectors;
  } else if (key == "two_pass_count") {
    if (value == "entities")
      p.two_pass_count_mode = TwoPassCountMode::Entities;
    else if (value == "requests")
      p.two_pass_count_mode = TwoPassCountMode::Requests;
    else
      throw ConfigError("two_pass_count must be entities or requests");
  } else if (key == "two_pass_include_redirects") {
    p.two_pass_include_redirects = parse_bool(key, value);
  } else {
    throw ConfigError("unknown profile setting \"" + std::string(key) + "\"");
  }
}

Profile parse_profile(std::istream& in, std::string_view source) {
  Profile profile;
  std::string line;
  std::size_t line_no = 0;
  bool seen_setting = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (text.empty() || text.front() == '#')
      continue;
    std::size_t eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(std::string(source), line_no, "expected key = value");
    std::string_view key = trim(text.substr(0, eq));
    std::string_view value = trim(text.substr(eq + 1));
    try {
      if (key == "extends") {
        if (seen_setting)
          throw ConfigError("extends must precede other settings");
        auto base = builtin_profile(value);
        if (!base)
          throw ConfigError("unknown preset " + std::string(value));
        profile = *base;
        continue;
      }
      apply_setting(profile, key, value);
      seen_setting = true;
    } catch (const ConfigError& e) {
      throw ParseError(std::string(source), line_no, e.what());
    }
  }
  return profile;
}

Profile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open profile " + path.string());
  return parse_profile(in, path.string());
}

Profile resolve_profile(std::string_view name_or_path) {
  if (auto preset = builtin_profile(name_or_path))
    return *preset;
  std::filesystem::path path{std::string(name_or_path)};
  if (!std::filesystem::exists(path))
    throw ConfigError("no preset or profile file named " + std::string(name_or_path));
  return load_profile(path);
}

std::string render_profile(const Profile& p) {
  const FilterConfig& f = p.filters;
  std::ostringstream out;
  out << "name = " << p.name << '\n';
  out << "min_len = " << f.min_len << '\n';
  out << "max_len = " << (f.max_len ? std::to_string(*f.max_len) : "none") << '\n';
  out << "charset_extra = " << (f.charset_extra ? *f.charset_extra : "none") << '\n';
  out << "delimiters = " << (f.delimiters.empty() ? "none" : f.delimiters) << '\n';
  out << "similarity = "
      << (f.similarity_threshold ? format_fraction(*f.similarity_threshold) : "none") << '\n';
  out << "similarity_scope = "
      << (p.similarity_scope == SimilarityScope::AllWithinUser ? "all" : "same_owner") << '\n';
  out << "drop_multi_value_keys = " << bool_text(f.drop_multi_value_keys) << '\n';
  out << "drop_dynamic_keys = " << bool_text(f.drop_dynamic_keys) << '\n';
  out << "keywords = "
      << (!f.keywords ? "off" : *f.keywords == KeywordList::defaults() ? "default" : "custom") << '\n';
  out << "cross_user_dedup = " << bool_text(f.cross_user_dedup) << '\n';
  out << "session = ";
  switch (f.session.kind) {
    case SessionPolicy::Kind::Keep:
      out << "keep";
      break;
    case SessionPolicy::Kind::DropNoExpiry:
      out << "drop_no_expiry";
      break;
    case SessionPolicy::Kind::DropExpiringBefore:
      out << "drop_expiring_before:" << f.session.days;
      break;
  }
  out << '\n';
  out << "include_request_echo = " << bool_text(p.include_request_echo) << '\n';
  out << "echo_unknown_expiry_passes = " << bool_text(p.echo_unknown_expiry_passes) << '\n';
  out << "locations = ";
  bool first = true;
  for (Location l : kAllLocations) {
    if (!p.locations.has(l))
      continue;
    out << (first ? "" : ",") << to_string(l);
    first = false;
  }
  out << '\n';
  out << "entity_mode = " << to_string(p.entity_mode) << '\n';
  out << "party_strategy = " << to_string(p.party_strategy) << '\n';
  out << "require_third_party_receiver = " << bool_text(p.require_third_party_receiver) << '\n';
  out << "detectors = ";
  first = true;
  for (auto [on, method] : {std::pair{p.detectors.shared, DetectionMethod::SharedIdHeuristic},
                            std::pair{p.detectors.two_pass, DetectionMethod::TwoPassIdLooking},
                            std::pair{p.detectors.known_pairs, DetectionMethod::KnownPairList}}) {
    if (!on)
      continue;
    out << (first ? "" : ",") << to_string(method);
    first = false;
  }
  out << '\n';
  out << "two_pass_count = "
      << (p.two_pass_count_mode == TwoPassCountMode::Entities ? "entities" : "requests") << '\n';
  out << "two_pass_include_redirects = " << bool_text(p.two_pass_include_redirects) << '\n';
  return out.str();
}

}  // namespace syncscope
