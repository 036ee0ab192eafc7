#include "syncscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "syncscope/ingest.hpp"

namespace syncscope {

namespace {

constexpr std::int64_t kStartMs = 1'700'000'000'000;
constexpr const char* kYear = "; Max-Age=31536000";

// std distributions are implementation-defined; these are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  std::string alnum(std::size_t length) {
    static constexpr std::string_view kAlphabet =
        "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
    std::string s(length, '0');
    for (auto& c : s)
      c = kAlphabet[below(kAlphabet.size())];
    return s;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

std::string tracker_domain(std::size_t t) { return "tracker" + std::to_string(t) + ".com"; }
std::string publisher_domain(std::size_t p) { return "site" + std::to_string(p) + ".org"; }
std::string publisher_host(std::size_t p) { return "www." + publisher_domain(p); }

UrlParts url(const std::string& text) { return parse_url(text); }

struct Owned {
  std::string owner;       // registrable domain
  std::string owner_host;  // host that set it
  std::string key;
  std::string value;
  std::optional<std::size_t> tracker;  // index when the owner is a tracker
};

// A transaction that carries `value` to tracker `receiver` at `location`.
HttpTransaction carrier(Location location, const std::string& value, const Owned& owner, std::size_t receiver) {
  const std::string sync = "https://sync." + tracker_domain(receiver);
  HttpTransaction tx;
  tx.response_status = 200;
  tx.response_headers = {{"content-type", "image/gif"}};
  switch (location) {
    case Location::QueryParam:
      tx.url = url(sync + "/sync?puid=" + value);
      break;
    case Location::Path:
      tx.url = url(sync + "/match/" + value + "/px.gif");
      break;
    case Location::RefererUrl:
      tx.url = url(sync + "/sync?v=1");
      tx.referer = url("https://" + owner.owner_host + "/usersync?uid=" + value);
      break;
    case Location::RedirectLocation:
      tx.url = url(sync + "/redir?v=1");
      tx.response_status = 302;
      tx.response_headers.emplace_back("location",
                                       "https://collect." + tracker_domain(receiver) + "/match?uid=" + value);
      break;
    case Location::NonstandardHeader:
      tx.url = url(sync + "/hb?v=1");
      tx.request_headers.emplace_back("x-sync-uid", value);
      break;
    case Location::PostBody:
      tx.method = "POST";
      tx.url = url("https://collect." + tracker_domain(receiver) + "/bid");
      tx.post_body = PostBody{"uid=" + value + "&slot=top", "application/x-www-form-urlencoded"};
      tx.response_headers = {{"content-type", "application/json"}};
      break;
  }
  return tx;
}

// Ingest derives set_cookie_lines from the response headers.
void add_set_cookie(HttpTransaction& tx, std::string line) {
  tx.response_headers.emplace_back("set-cookie", line);
  tx.set_cookie_lines.push_back(std::move(line));
}

// One body item: either a carrier of a value or a filler request.
struct Item {
  enum class Kind { Plant, Leak, NonIdentifier, Filler } kind = Kind::Filler;
  Location location = Location::QueryParam;
  std::size_t owned = 0;  // index into the user's owned list
  std::string value;
};

void check(bool ok, const std::string& message) {
  if (!ok)
    throw InfeasibleParams(message);
}

}  // namespace

Profile synth_profile() {
  Profile p;
  p.name = "synth";
  FilterConfig& f = p.filters;
  f.min_len = 10;
  f.max_len = 100;
  f.charset_extra = "-_";
  f.delimiters = "&;";
  f.similarity_threshold = 0.66;
  f.drop_multi_value_keys = true;
  f.drop_dynamic_keys = true;
  f.keywords = KeywordList::defaults();
  f.cross_user_dedup = true;
  f.session = {SessionPolicy::Kind::DropExpiringBefore, 30};
  p.locations = ScanLocationSet::all();
  p.entity_mode = EntityMode::Etld1;
  p.party_strategy = PartyStrategy::Etld1;
  return p;
}

Resources synth_resources() {
  Resources r;
  r.psl.add_rule("com");
  r.psl.add_rule("org");
  return r;
}

std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights) {
  std::vector<std::size_t> counts(weights.size(), 0);
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || sum <= 0)
    return counts;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double quota = static_cast<double>(total) * weights[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - std::floor(quota), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned)
    ++counts[remainders[k % remainders.size()].second];
  return counts;
}

SynthOutput generate(const SynthParams& params) {
  const SynthNoise& noise = params.noise;
  const Profile profile = synth_profile();
  const FilterConfig& f = profile.filters;

  check(params.n_users >= 1, "n_users must be at least 1");
  check(params.n_trackers >= 1 && params.n_publishers >= 1, "need at least one tracker and one publisher");
  check(params.id_length > f.min_len && params.id_length <= *f.max_len,
        "id_length must be in (" + std::to_string(f.min_len) + ", " + std::to_string(*f.max_len) + "]");
  for (double w : params.plant_locations)
    check(w >= 0 && std::isfinite(w), "plant location weights must be finite and non-negative");
  std::vector<std::size_t> per_location = apportion(params.plant_syncs, params.plant_locations);
  check(params.plant_syncs == 0 ||
            std::accumulate(per_location.begin(), per_location.end(), std::size_t{0}) == params.plant_syncs,
        "plant location weights sum to zero");
  check(noise.shared_across_users == 0 || params.n_users >= 2, "shared-across-user noise needs two users");

  const std::size_t noise_cookies = noise.dynamic_keys + noise.session_cookies + noise.shared_across_users +
                                    noise.short_values + noise.timestamp_values + noise.multi_value_keys;
  const std::size_t set_txs = noise_cookies + noise.dynamic_keys;
  const std::size_t leaks = set_txs;
  check(params.n_trackers >= 2 || (params.plant_syncs == 0 && leaks == 0),
        "third-party carriers need at least two trackers");
  const std::size_t setup = params.n_publishers + params.n_trackers + set_txs;
  const std::size_t required = setup + leaks + params.plant_syncs + noise.non_identifier_tokens;
  check(required <= params.n_transactions,
        "need " + std::to_string(required) + " transactions per user, have " + std::to_string(params.n_transactions));

  Rng rng(params.seed);
  std::unordered_set<std::string> used;
  auto fresh_id = [&] {
    for (;;) {
      std::string s = rng.alnum(params.id_length);
      if (hits_keyword(s, *f.keywords) || !used.insert(s).second)
        continue;
      return s;
    }
  };
  std::vector<std::string> shared_values;
  for (std::size_t i = 0; i < noise.shared_across_users; ++i)
    shared_values.push_back(fresh_id());

  SynthOutput out;
  struct PlantRef {
    std::size_t user, tx;
    Location location;
    std::string value, sender, receiver;
  };
  std::vector<PlantRef> plants;

  for (std::size_t u = 0; u < params.n_users; ++u) {
    Trace trace;
    trace.user_id = "u" + std::to_string(u + 1);
    std::int64_t ts = kStartMs;
    std::size_t landing = 0;
    auto landing_url = [&] { return url("https://" + publisher_host(landing) + "/"); };
    auto push = [&](HttpTransaction tx) {
      ts += 20 + static_cast<std::int64_t>(rng.below(380));
      tx.timestamp_ms = ts;
      tx.user_id = trace.user_id;
      tx.landing_page = landing_url();
      if (!tx.referer && tx.url.host != tx.landing_page.host)
        tx.referer = tx.landing_page;
      // Ingest derives the referer from the header; keep them in step.
      if (tx.referer)
        tx.request_headers.insert(tx.request_headers.begin(), {"referer", tx.referer->raw});
      trace.transactions.push_back(std::move(tx));
      return trace.transactions.size() - 1;
    };

    std::vector<Owned> owned;
    for (std::size_t p = 0; p < params.n_publishers; ++p) {
      landing = p;
      HttpTransaction page;
      page.url = landing_url();
      page.response_status = 200;
      page.response_headers = {{"content-type", "text/html"}};
      push(std::move(page));
      Owned id{publisher_domain(p), publisher_host(p), "_pubid", fresh_id(), std::nullopt};
      trace.js_cookie_sets.push_back({ts, "https://" + publisher_host(p) + "/", id.key + "=" + id.value + kYear});
      owned.push_back(std::move(id));
    }
    std::vector<std::string> tracker_uid(params.n_trackers);
    for (std::size_t t = 0; t < params.n_trackers; ++t) {
      landing = t % params.n_publishers;
      Owned id{tracker_domain(t), "sync." + tracker_domain(t), "uid", fresh_id(), t};
      HttpTransaction tx;
      tx.url = url("https://" + id.owner_host + "/pixel.gif?v=1");
      tx.response_status = 200;
      tx.response_headers = {{"content-type", "image/gif"}};
      add_set_cookie(tx, id.key + "=" + id.value + kYear + "; Domain=." + id.owner + "; Path=/");
      tracker_uid[t] = id.value;
      push(std::move(tx));
      owned.push_back(std::move(id));
    }
    const std::size_t n_identifiers = owned.size();

    // Noise cookies, each set by a random tracker.
    std::vector<std::pair<std::size_t, std::string>> leaked;  // (tracker, value)
    auto set_noise = [&](const std::string& key, const std::string& value, bool session) {
      std::size_t t = rng.below(params.n_trackers);
      HttpTransaction tx;
      tx.url = url("https://sync." + tracker_domain(t) + "/c?v=2");
      tx.response_status = 200;
      tx.response_headers = {{"content-type", "image/gif"}};
      add_set_cookie(tx, key + "=" + value + (session ? "" : kYear) + "; Domain=." + tracker_domain(t));
      push(std::move(tx));
      return t;
    };
    for (std::size_t i = 0; i < noise.session_cookies; ++i) {
      std::string v = fresh_id();
      leaked.emplace_back(set_noise("sess" + std::to_string(i), v, true), v);
    }
    for (std::size_t i = 0; i < noise.short_values; ++i) {
      std::string v = rng.alnum(4 + rng.below(5));
      leaked.emplace_back(set_noise("lang" + std::to_string(i), v, false), v);
    }
    for (std::size_t i = 0; i < noise.timestamp_values; ++i) {
      std::string v = std::to_string(1'600'000'000'000LL + static_cast<long long>(rng.below(100'000'000'000ULL)));
      leaked.emplace_back(set_noise("_lt" + std::to_string(i), v, false), v);
    }
    for (std::size_t i = 0; i < noise.shared_across_users; ++i)
      leaked.emplace_back(set_noise("_sh" + std::to_string(i), shared_values[i], false), shared_values[i]);
    for (std::size_t i = 0; i < noise.multi_value_keys; ++i) {
      std::string a = fresh_id(), b = fresh_id();
      leaked.emplace_back(set_noise("prefs" + std::to_string(i), a + "&" + b, false), a);
    }
    for (std::size_t i = 0; i < noise.dynamic_keys; ++i) {
      const std::string key = "_dyn" + std::to_string(i);
      std::string a = fresh_id(), b = fresh_id();
      std::size_t t = set_noise(key, a, false);
      HttpTransaction again;
      again.url = url("https://sync." + tracker_domain(t) + "/c?v=3");
      again.response_status = 200;
      add_set_cookie(again, key + "=" + b + kYear + "; Domain=." + tracker_domain(t));
      push(std::move(again));
      leaked.emplace_back(t, a);
      leaked.emplace_back(t, b);
    }

    std::vector<Item> items;
    for (std::size_t loc = 0; loc < per_location.size(); ++loc)
      for (std::size_t k = 0; k < per_location[loc]; ++k)
        items.push_back({Item::Kind::Plant, kAllLocations[loc], rng.below(n_identifiers), {}});
    for (auto& [t, value] : leaked) {
      // Noise owners are trackers; record the owner slot of that tracker.
      items.push_back({Item::Kind::Leak, kAllLocations[rng.below(kAllLocations.size())],
                       params.n_publishers + t, std::move(value)});
    }
    for (std::size_t i = 0; i < noise.non_identifier_tokens; ++i)
      items.push_back({Item::Kind::NonIdentifier, Location::QueryParam, 0, fresh_id()});
    items.resize(params.n_transactions - setup, Item{});
    rng.shuffle(items);

    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i % 25 == 0)
        landing = rng.below(params.n_publishers);
      const Item& item = items[i];
      if (item.kind == Item::Kind::Plant || item.kind == Item::Kind::Leak) {
        const Owned& owner = owned[item.owned];
        std::size_t receiver = rng.below(params.n_trackers - (owner.tracker ? 1 : 0));
        if (owner.tracker && receiver >= *owner.tracker)
          ++receiver;
        const std::string& value = item.kind == Item::Kind::Plant ? owner.value : item.value;
        std::size_t index = push(carrier(item.location, value, owner, receiver));
        if (item.kind == Item::Kind::Plant)
          plants.push_back({u, index, item.location, value, owner.owner, tracker_domain(receiver)});
        continue;
      }
      HttpTransaction tx;
      tx.response_status = 200;
      std::size_t t = rng.below(params.n_trackers);
      std::string cb = std::to_string(100000 + rng.below(900000));
      if (item.kind == Item::Kind::NonIdentifier) {
        tx.url = url("https://cdn." + tracker_domain(t) + "/ads/slot.js?rid=" + item.value + "&cb=" + cb);
        tx.response_headers = {{"content-type", "application/javascript"}};
      } else {
        switch (rng.below(3)) {
          case 0:
            tx.url = url("https://cdn." + tracker_domain(t) + "/ads/slot.js?cb=" + cb);
            tx.response_headers = {{"content-type", "application/javascript"}};
            break;
          case 1:
            tx.url = url("https://sync." + tracker_domain(t) + "/ping?cb=" + cb);
            tx.request_headers.emplace_back("cookie", "uid=" + tracker_uid[t]);
            tx.response_headers = {{"content-type", "image/gif"}, {"cache-control", "no-store"}};
            break;
          default:
            tx.url = url("https://" + publisher_host(landing) + "/article/" + std::to_string(rng.below(500)));
            tx.response_headers = {{"content-type", "text/html"}};
            break;
        }
      }
      push(std::move(tx));
    }

    for (std::size_t k = 0; k < n_identifiers; ++k)
      out.truth.identifiers.push_back({trace.user_id, owned[k].owner, owned[k].key, owned[k].value});
    out.traces.push_back(std::move(trace));
  }

  assign_jsonl_sequence(out.traces);
  for (const auto& p : plants) {
    const HttpTransaction& tx = out.traces[p.user].transactions[p.tx];
    out.truth.events.push_back({tx.user_id, tx.seq_no, p.value, p.location, p.sender, p.receiver});
  }
  std::sort(out.truth.events.begin(), out.truth.events.end());
  std::sort(out.truth.identifiers.begin(), out.truth.identifiers.end());

  // Every planted identifier must survive the filter chain it is scored with.
  Resources resources = synth_resources();
  IdentifierSets extracted = extract_identifiers(out.traces, profile, resources);
  std::set<std::tuple<std::string, std::string, std::string>> survivors;
  for (const auto& [user, ids] : extracted)
    for (const auto& id : ids)
      survivors.emplace(user, id.owner.name, id.value);
  for (const auto& id : out.truth.identifiers)
    check(survivors.count({id.user_id, id.owner, id.value}) > 0,
          "planted identifier " + id.value + " of " + id.owner + " does not survive the synth profile");
  return out;
}

Score score(std::span<const SyncEvent> detected, const GroundTruth& truth) {
  using Key = std::tuple<std::string, std::uint64_t, std::string, Location>;
  std::set<Key> found, expected;
  for (const auto& e : detected)
    found.emplace(e.user_id, e.seq_no, e.shared_value, e.location);
  for (const auto& e : truth.events)
    expected.emplace(e.user_id, e.seq_no, e.value, e.location);
  Score s;
  for (const auto& k : found)
    (expected.count(k) ? s.true_positives : s.false_positives)++;
  s.false_negatives = expected.size() - s.true_positives;
  if (!found.empty())
    s.precision = static_cast<double>(s.true_positives) / static_cast<double>(found.size());
  if (!expected.empty())
    s.recall = static_cast<double>(s.true_positives) / static_cast<double>(expected.size());
  return s;
}

void write_truth_jsonl(std::ostream& out, const GroundTruth& truth) {
  using ojson = nlohmann::ordered_json;
  for (const auto& e : truth.events) {
    ojson line;
    line["kind"] = "event";
    line["user"] = e.user_id;
    line["seq"] = e.seq_no;
    line["value"] = e.value;
    line["location"] = to_string(e.location);
    line["sender"] = e.sender;
    line["receiver"] = e.receiver;
    out << line.dump() << '\n';
  }
  for (const auto& id : truth.identifiers) {
    ojson line;
    line["kind"] = "identifier";
    line["user"] = id.user_id;
    line["owner"] = id.owner;
    line["key"] = id.key;
    line["value"] = id.value;
    out << line.dump() << '\n';
  }
}

GroundTruth read_truth_jsonl(std::istream& in, std::string_view source) {
  GroundTruth truth;
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
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "event") {
        auto location = location_from_string(j.at("location").get<std::string>());
        if (!location)
          throw fail("unknown location");
        truth.events.push_back({j.at("user").get<std::string>(), j.at("seq").get<std::uint64_t>(),
                                j.at("value").get<std::string>(), *location, j.value("sender", std::string{}),
                                j.value("receiver", std::string{})});
      } else if (kind == "identifier") {
        truth.identifiers.push_back({j.at("user").get<std::string>(), j.at("owner").get<std::string>(),
                                     j.value("key", std::string{}), j.at("value").get<std::string>()});
      } else {
        throw fail("unknown kind \"" + kind + "\"");
      }
    } catch (const nlohmann::json::exception& ex) {
      throw fail(ex.what());
    }
  }
  std::sort(truth.events.begin(), truth.events.end());
  std::sort(truth.identifiers.begin(), truth.identifiers.end());
  return truth;
}

}  // namespace syncscope
