#include "syncscope/detect.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "syncscope/party.hpp"
#include "syncscope/scan.hpp"

namespace syncscope {

namespace {

class EntityCache {
 public:
  EntityCache(EntityMode mode, const Resources& resources) : mode_(mode), resources_(resources) {}

  const Entity& operator()(const std::string& host) {
    auto it = cache_.find(host);
    if (it == cache_.end())
      it = cache_.emplace(host, entity_or_host(host, mode_, resources_.psl, resources_.orgs)).first;
    return it->second;
  }

 private:
  EntityMode mode_;
  const Resources& resources_;
  std::unordered_map<std::string, Entity> cache_;
};

using ValueIndex = std::unordered_map<std::string, std::vector<const Identifier*>>;

ValueIndex index_identifiers(const IdentifierSets& identifiers, const std::string& user) {
  ValueIndex index;
  auto it = identifiers.find(user);
  if (it == identifiers.end())
    return index;
  for (const Identifier& id : it->second)
    index[id.value].push_back(&id);
  return index;
}

// First identifier with this value whose owner differs from the receiver.
const Identifier* match(const ValueIndex& index, const std::string& value, const Entity& receiver) {
  auto it = index.find(value);
  if (it == index.end())
    return nullptr;
  for (const Identifier* id : it->second)
    if (id->owner != receiver)
      return id;
  return nullptr;
}

SyncEvent make_event(const HttpTransaction& tx, const Identifier& id, const Entity& receiver,
                     const Entity& landing, Location location, DetectionMethod method) {
  SyncEvent e;
  e.user_id = tx.user_id;
  e.seq_no = tx.seq_no;
  e.timestamp_ms = tx.timestamp_ms;
  e.shared_value = id.value;
  e.sender = id.owner;
  e.receiver = receiver;
  e.location = location;
  e.method = method;
  e.relation = id.owner == landing ? Relation::FirstPartyLeak : Relation::ThirdPartySync;
  e.matched_identifier = IdentifierRef{id.owner_host, id.source_key};
  return e;
}

bool id_looking(const std::string& token, const FilterConfig& f) {
  if (!passes_length(token, f.min_len, f.max_len))
    return false;
  return !f.charset_extra || passes_charset(token, *f.charset_extra);
}

}  // namespace

std::vector<SyncEvent> detect_shared(std::span<const Trace> traces, const IdentifierSets& identifiers,
                                     const Profile& profile, const Resources& resources, Diagnostics* diag) {
  std::vector<SyncEvent> events;
  EntityCache entity(profile.entity_mode, resources);
  for (const Trace& trace : traces) {
    ValueIndex index = index_identifiers(identifiers, trace.user_id);
    if (index.empty())
      continue;
    for (const HttpTransaction& tx : trace.transactions) {
      if (profile.require_third_party_receiver &&
          label_party(tx.landing_page, tx.url, profile.party_strategy, resources.psl, resources.orgs).relation !=
              PartyRelation::ThirdParty)
        continue;
      auto hits = scan_transaction(tx, profile.locations, profile.filters, diag);
      if (hits.empty())
        continue;
      const Entity& receiver = entity(tx.url.host);
      const Entity& landing = entity(tx.landing_page.host);
      for (const ScanHit& hit : hits)
        if (const Identifier* id = match(index, hit.token, receiver))
          events.push_back(make_event(tx, *id, receiver, landing, hit.location, DetectionMethod::SharedIdHeuristic));
    }
  }
  normalize_events(events);
  return events;
}

ScanLocationSet two_pass_locations(const Profile& profile) {
  ScanLocationSet set = ScanLocationSet::of({Location::QueryParam, Location::Path, Location::RefererUrl});
  if (profile.two_pass_include_redirects)
    set.set(Location::RedirectLocation);
  set.standard_headers = profile.locations.standard_headers;
  return set;
}

TwoPassResult detect_two_pass(std::span<const Trace> traces, const IdentifierSets& identifiers,
                              const Profile& profile, const Resources& resources, Diagnostics* diag) {
  TwoPassResult result;
  EntityCache entity(profile.entity_mode, resources);
  const ScanLocationSet locations = two_pass_locations(profile);

  for (const Trace& trace : traces) {
    std::map<std::string, std::vector<TokenOccurrence>> table;
    std::unordered_map<std::uint64_t, const HttpTransaction*> by_seq;
    for (const HttpTransaction& tx : trace.transactions) {
      if (tx.method != "GET")
        continue;
      by_seq.emplace(tx.seq_no, &tx);
      const Entity& receiver = entity(tx.url.host);
      for (ScanHit& hit : scan_transaction(tx, locations, profile.filters, diag))
        if (id_looking(hit.token, profile.filters))
          table[std::move(hit.token)].push_back({tx.seq_no, hit.location, receiver});
    }

    ValueIndex index = index_identifiers(identifiers, trace.user_id);
    for (auto& [token, occurrences] : table) {
      std::sort(occurrences.begin(), occurrences.end());
      occurrences.erase(std::unique(occurrences.begin(), occurrences.end()), occurrences.end());
      std::set<Entity> receivers;
      std::set<std::uint64_t> requests;
      for (const auto& o : occurrences) {
        receivers.insert(o.receiver);
        requests.insert(o.seq_no);
      }
      std::size_t distinct =
          profile.two_pass_count_mode == TwoPassCountMode::Entities ? receivers.size() : requests.size();
      if (distinct < 2)
        continue;

      for (const auto& o : occurrences) {
        const Identifier* id = match(index, token, o.receiver);
        if (!id)
          continue;
        const HttpTransaction& tx = *by_seq.at(o.seq_no);
        result.events.push_back(
            make_event(tx, *id, o.receiver, entity(tx.landing_page.host), o.location, DetectionMethod::TwoPassIdLooking));
      }
      result.sharing.push_back({trace.user_id, token, std::move(occurrences)});
    }
  }
  std::sort(result.sharing.begin(), result.sharing.end(), [](const IdSharingEvent& a, const IdSharingEvent& b) {
    return std::tie(a.user_id, a.token) < std::tie(b.user_id, b.token);
  });
  normalize_events(result.events);
  return result;
}

PairList parse_pair_list(std::istream& in, std::string_view source) {
  PairList pairs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line.front() == '#')
      continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw ParseError(std::string(source), number, "expected referrer<TAB>request");
    pairs.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return pairs;
}

PairList load_pair_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open pair list " + path.string());
  return parse_pair_list(in, path.string());
}

std::vector<SyncEvent> detect_known_pairs(std::span<const Trace> traces, const PairList& pairs,
                                          const Profile& profile, const Resources& resources) {
  std::vector<SyncEvent> events;
  EntityCache entity(profile.entity_mode, resources);
  for (const Trace& trace : traces) {
    for (const HttpTransaction& tx : trace.transactions) {
      if (!tx.referer)
        continue;
      const Entity& sender = entity(tx.referer->host);
      const Entity& receiver = entity(tx.url.host);
      if (!pairs.count({sender.name, receiver.name}))
        continue;
      SyncEvent e;
      e.user_id = tx.user_id;
      e.seq_no = tx.seq_no;
      e.timestamp_ms = tx.timestamp_ms;
      e.sender = sender;
      e.receiver = receiver;
      e.location = Location::RefererUrl;
      e.method = DetectionMethod::KnownPairList;
      e.relation = sender == entity(tx.landing_page.host) ? Relation::FirstPartyLeak : Relation::ThirdPartySync;
      events.push_back(std::move(e));
    }
  }
  normalize_events(events);
  return events;
}

std::vector<SyncEvent> detect_all(std::span<const Trace> traces, const IdentifierSets& identifiers,
                                  const Profile& profile, const Resources& resources, const PairList* pairs,
                                  Diagnostics* diag) {
  std::vector<SyncEvent> events;
  auto append = [&](std::vector<SyncEvent> more) {
    events.insert(events.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  };
  if (profile.detectors.shared)
    append(detect_shared(traces, identifiers, profile, resources, diag));
  if (profile.detectors.two_pass)
    append(detect_two_pass(traces, identifiers, profile, resources, diag).events);
  if (profile.detectors.known_pairs) {
    if (!pairs)
      throw ConfigError("known-pairs detector needs a pair list");
    append(detect_known_pairs(traces, *pairs, profile, resources));
  }
  normalize_events(events);
  return events;
}

void write_events_jsonl(std::ostream& out, std::span<const SyncEvent> events) {
  using ojson = nlohmann::ordered_json;
  for (const SyncEvent& e : events) {
    ojson line;
    line["user"] = e.user_id;
    line["seq"] = e.seq_no;
    line["ts"] = e.timestamp_ms;
    line["value"] = e.shared_value;
    line["sender"] = e.sender.name;
    line["receiver"] = e.receiver.name;
    line["location"] = to_string(e.location);
    line["method"] = to_string(e.method);
    line["relation"] = to_string(e.relation);
    line["mode"] = to_string(e.sender.mode);
    if (e.matched_identifier) {
      line["owner_host"] = e.matched_identifier->owner_host;
      line["key"] = e.matched_identifier->key;
    }
    out << line.dump() << '\n';
  }
}

std::vector<SyncEvent> read_events_jsonl(std::istream& in, std::string_view source) {
  std::vector<SyncEvent> events;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    auto fail = [&](const std::string& msg) { return ParseError(std::string(source), number, msg); };
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw fail("not a JSON object");
    try {
      SyncEvent e;
      e.user_id = j.at("user").get<std::string>();
      e.seq_no = j.at("seq").get<std::uint64_t>();
      e.timestamp_ms = j.value("ts", std::int64_t{0});
      e.shared_value = j.value("value", std::string{});
      EntityMode mode = EntityMode::Etld1;
      if (j.contains("mode")) {
        auto m = entity_mode_from_string(j["mode"].get<std::string>());
        if (!m)
          throw fail("unknown entity mode");
        mode = *m;
      }
      e.sender = {mode, j.at("sender").get<std::string>()};
      e.receiver = {mode, j.at("receiver").get<std::string>()};
      auto loc = location_from_string(j.at("location").get<std::string>());
      if (!loc)
        throw fail("unknown location");
      e.location = *loc;
      auto method = detection_method_from_string(j.value("method", std::string{"shared_id"}));
      if (!method)
        throw fail("unknown method");
      e.method = *method;
      auto relation = relation_from_string(j.value("relation", std::string{"third_party_sync"}));
      if (!relation)
        throw fail("unknown relation");
      e.relation = *relation;
      if (j.contains("owner_host"))
        e.matched_identifier = IdentifierRef{j["owner_host"].get<std::string>(), j.value("key", std::string{})};
      events.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw fail(ex.what());
    }
  }
  return events;
}

}  // namespace syncscope
