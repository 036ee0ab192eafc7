// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failing criteria.

#include <algorithm>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "support/oracles.hpp"
#include "support/random_inputs.hpp"
#include "syncscope/detect.hpp"
#include "syncscope/identifiers.hpp"
#include "syncscope/ingest.hpp"
#include "syncscope/report.hpp"
#include "syncscope/similarity.hpp"
#include "syncscope/synth.hpp"

using namespace syncscope;
using Clock = std::chrono::steady_clock;

namespace {

const std::string kTestData = SYNCSCOPE_TEST_DATA_DIR;
const std::string kData = SYNCSCOPE_REPO_DATA_DIR;

// Tolerances and budgets.
constexpr double kWalkthroughBudgetS = 1.0;
constexpr double kSynthBudgetPerSeedS = 10.0;
constexpr double kPercentSumTolerance = 1e-9;
// Active checkPublicSuffix lines in the upstream test file.
constexpr std::size_t kPslVectorCount = 78;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass)
      detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const Resources& real_resources() {
  static const Resources r = [] {
    Resources res;
    res.psl = PublicSuffixList::load(kData + "/public_suffix_list.dat");
    return res;
  }();
  return r;
}

Profile preset(const char* name) { return *builtin_profile(name); }

std::vector<SyncEvent> run_shared(std::span<const Trace> traces, const Profile& profile, const Resources& r) {
  IdentifierSets ids = extract_identifiers(traces, profile, r);
  return detect_shared(traces, ids, profile, r);
}

Outcome walkthrough() {
  Outcome o;
  auto start = Clock::now();
  IngestResult in = load_trace_jsonl(kTestData + "/walkthrough.jsonl");
  Profile p = preset("englehardt2016");
  p.filters.min_len = 2;
  auto events = run_shared(in.traces, p, real_resources());
  Profile strict = preset("englehardt2016");
  strict.filters.min_len = 10;
  auto none = run_shared(in.traces, strict, real_resources());
  double elapsed = seconds_since(start);

  if (in.traces.size() != 1 || in.traces[0].transactions.size() != 6)
    o.fail("fixture does not hold 6 transactions");
  if (events.size() != 1) {
    o.fail("min_len 2 gave " + std::to_string(events.size()) + " events");
  } else {
    const SyncEvent& e = events[0];
    if (e.sender.name != "tracker1.com" || e.receiver.name != "tracker2.com" || e.location != Location::QueryParam ||
        e.method != DetectionMethod::SharedIdHeuristic || e.shared_value != "ABC")
      o.fail("unexpected event " + e.sender.name + "->" + e.receiver.name + " " + std::string(to_string(e.location)));
  }
  if (!none.empty())
    o.fail("min_len 10 gave " + std::to_string(none.size()) + " events");
  if (elapsed >= kWalkthroughBudgetS)
    o.fail("took " + std::to_string(elapsed) + " s");
  if (o.pass)
    o.detail = "1 event tracker1.com->tracker2.com query_param at min_len 2, 0 at min_len 10, " +
               std::to_string(elapsed * 1000).substr(0, 5) + " ms";
  return o;
}

SynthParams oracle_params(std::uint64_t seed, std::size_t plants) {
  SynthParams p;
  p.seed = seed;
  p.n_users = 2;
  p.n_transactions = 10'000;
  p.n_trackers = 12;
  p.n_publishers = 6;
  p.plant_syncs = plants;
  p.id_length = 16;
  p.noise = {40, 4, 4, 4, 4, 4, 4};
  return p;
}

Outcome synthetic_oracle() {
  Outcome o;
  const Profile profile = synth_profile();
  double worst = 0;
  std::size_t planted = 0;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    auto start = Clock::now();
    SynthOutput out = generate(oracle_params(seed, 50));
    auto events = run_shared(out.traces, profile, real_resources());
    double elapsed = seconds_since(start);
    worst = std::max(worst, elapsed);
    Score s = score(events, out.truth);
    planted += out.truth.events.size();
    std::array<std::size_t, 6> per_location{};
    for (const auto& e : out.truth.events)
      ++per_location[static_cast<std::size_t>(e.location)];
    if (std::find(per_location.begin(), per_location.end(), 0u) != per_location.end())
      o.fail("seed " + std::to_string(seed) + " left a location unplanted");
    if (s.precision != 1.0 || s.recall != 1.0)
      o.fail("seed " + std::to_string(seed) + " precision " + std::to_string(s.precision) + " recall " +
             std::to_string(s.recall));
    if (elapsed >= kSynthBudgetPerSeedS)
      o.fail("seed " + std::to_string(seed) + " took " + std::to_string(elapsed) + " s");
  }
  std::size_t false_positives = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SynthOutput out = generate(oracle_params(1000 + seed, 0));
    IdentifierSets ids = extract_identifiers(out.traces, profile, real_resources());
    auto shared = detect_shared(out.traces, ids, profile, real_resources());
    auto two_pass = detect_two_pass(out.traces, ids, profile, real_resources());
    false_positives += shared.size() + two_pass.events.size();
  }
  if (false_positives)
    o.fail(std::to_string(false_positives) + " events over 100 plant-free seeds");
  if (o.pass)
    o.detail = "25 seeds, " + std::to_string(planted) + " planted events, P=R=1; 0 events over 100 plant-free seeds; worst seed " +
               std::to_string(worst).substr(0, 5) + " s";
  return o;
}

bool multiset_subset(std::vector<std::string> sub, std::vector<std::string> super) {
  std::sort(sub.begin(), sub.end());
  std::sort(super.begin(), super.end());
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

Outcome filter_properties() {
  Outcome o;
  std::vector<Profile> profiles;
  for (const auto& name : preset_names())
    profiles.push_back(*builtin_profile(name));
  profiles.push_back(synth_profile());
  Profile everything = synth_profile();
  everything.filters.charset_extra = "-_=.,:";
  profiles.push_back(everything);

  gen::Rng rng(3);
  std::size_t checked_stages = 0;
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    const Profile& profile = profiles[trial % profiles.size()];
    const FilterConfig& f = profile.filters;
    auto traces = gen::cookie_traces(rng, 1 + rng.below(3));

    std::vector<StageSnapshot> stages;
    IdentifierSets ids = extract_identifiers(traces, profile, real_resources(), nullptr, &stages);

    std::map<std::string, std::vector<std::string>> raw;  // user -> raw cookie text
    for (const auto& t : traces) {
      for (const auto& tx : t.transactions) {
        raw[t.user_id].insert(raw[t.user_id].end(), tx.set_cookie_lines.begin(), tx.set_cookie_lines.end());
        for (const auto& [name, value] : tx.request_headers)
          if (name == "cookie")
            raw[t.user_id].push_back(value);
      }
      for (const auto& js : t.js_cookie_sets)
        raw[t.user_id].push_back(js.cookie);
    }

    std::map<std::string, const StageSnapshot*> previous;
    for (const StageSnapshot& s : stages) {
      ++checked_stages;
      if (s.stage == "delimiter") {
        for (const auto& v : s.values) {
          bool found = false;
          for (const auto& text : raw[s.user_id])
            found |= text.find(v) != std::string::npos;
          if (!found)
            o.fail("trial " + std::to_string(trial) + ": token " + v + " is not a substring of any cookie");
        }
      } else if (auto it = previous.find(s.user_id); it != previous.end()) {
        if (!multiset_subset(s.values, it->second->values))
          o.fail("trial " + std::to_string(trial) + ": stage " + s.stage + " added values");
      }
      previous[s.user_id] = &s;
    }
    for (const auto& [user, list] : ids) {
      std::vector<std::string> finals;
      for (const auto& id : list) {
        finals.push_back(id.value);
        bool length_ok = id.value.size() > f.min_len && (!f.max_len || id.value.size() <= *f.max_len);
        bool charset_ok = !f.charset_extra ||
                          std::all_of(id.value.begin(), id.value.end(), [&](char c) {
                            return std::isalnum(static_cast<unsigned char>(c)) ||
                                   f.charset_extra->find(c) != std::string::npos;
                          });
        if (!length_ok || !charset_ok)
          o.fail("trial " + std::to_string(trial) + ": identifier " + id.value + " fails length/charset");
      }
      if (auto it = previous.find(user); it != previous.end()) {
        std::set<std::string> last(it->second->values.begin(), it->second->values.end());
        for (const auto& v : finals)
          if (!last.count(v))
            o.fail("trial " + std::to_string(trial) + ": identifier " + v + " missing from last stage");
      }
    }

    std::vector<StageSnapshot> again_stages;
    if (extract_identifiers(traces, profile, real_resources(), nullptr, &again_stages) != ids)
      o.fail("trial " + std::to_string(trial) + ": rerun differs");
    auto shuffled = traces;
    for (auto& t : shuffled)
      std::shuffle(t.transactions.begin(), t.transactions.end(), rng.engine());
    std::reverse(shuffled.begin(), shuffled.end());
    if (extract_identifiers(shuffled, profile, real_resources()) != ids)
      o.fail("trial " + std::to_string(trial) + ": transaction order changed the result");
  }
  if (o.pass)
    o.detail = "1000 random stores, " + std::to_string(checked_stages) + " stage snapshots checked";
  return o;
}

Outcome ratcliff() {
  Outcome o;
  auto strings = oracle::all_strings("abc", 6);
  std::size_t pairs = 0;
  for (const auto& a : strings) {
    for (const auto& b : strings) {
      ++pairs;
      std::size_t got = ratcliff_obershelp_matches(a, b);
      if (got != oracle::ro_matches(a, b)) {
        o.fail("(" + a + "," + b + ") matches " + std::to_string(got) + " vs oracle " +
               std::to_string(oracle::ro_matches(a, b)));
        return o;
      }
    }
  }
  gen::Rng rng(4);
  for (int i = 0; i < 10'000; ++i) {
    std::string alphabet = i % 2 ? "ab" : "0123456789abcdefXYZ-_";
    std::string a = rng.chars(alphabet, rng.below(40));
    std::string b = rng.chars(alphabet, rng.below(40));
    double s = ratcliff_obershelp(a, b);
    if (!(s >= 0.0 && s <= 1.0))
      o.fail("out of range for (" + a + "," + b + ")");
    if (ratcliff_obershelp(a, a) != 1.0)
      o.fail("sim(a,a) != 1 for " + a);
    if (s != oracle::ro_similarity(a, b))
      o.fail("random pair (" + a + "," + b + ") disagrees with oracle");
    if (!o.pass)
      return o;
  }
  double abcd = ratcliff_obershelp("abcd", "abce");
  if (abcd != 0.75)
    o.fail("sim(abcd,abce) = " + std::to_string(abcd));
  if (o.pass)
    o.detail = std::to_string(pairs) + " exhaustive pairs over {a,b,c}^<=6 match the oracle; 10000 random pairs in [0,1]; sim(abcd,abce)=0.75";
  return o;
}

Outcome public_suffix() {
  Outcome o;
  auto vectors = oracle::load_psl_vectors(kTestData + "/test_psl.txt");
  std::size_t agree = 0;
  for (const auto& v : vectors) {
    auto got = real_resources().psl.registrable_domain(v.input);
    if (got == v.expected)
      ++agree;
    else
      o.fail("line " + std::to_string(v.line) + " '" + v.input + "' -> '" + got.value_or("null") + "', want '" +
             v.expected.value_or("null") + "'");
  }
  if (vectors.size() != kPslVectorCount)
    o.fail("only " + std::to_string(vectors.size()) + " vectors loaded");
  if (o.pass)
    o.detail = std::to_string(agree) + "/" + std::to_string(vectors.size()) + " vectors agree";
  return o;
}

Outcome two_pass() {
  Outcome o;
  gen::Rng rng(6);
  gen::TwoPassWorld world;
  std::size_t sharing = 0, events = 0, subsumed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Profile profile = preset(trial % 3 == 0 ? "englehardt2016" : trial % 3 == 1 ? "olejnik2014" : "papadopoulos2019");
    profile.filters.min_len = trial % 2 ? 4 : profile.filters.min_len;
    profile.two_pass_count_mode = trial % 5 == 0 ? TwoPassCountMode::Requests : TwoPassCountMode::Entities;
    profile.two_pass_include_redirects = trial % 7 == 0;
    profile.entity_mode = trial % 4 == 0 ? EntityMode::Domain : profile.entity_mode;
    profile.locations = ScanLocationSet::of({Location::QueryParam, Location::Path, Location::RefererUrl});

    std::vector<Trace> traces = {gen::two_pass_trace(rng, world, "u1", 1 + rng.below(200))};
    if (trial % 4 == 3)
      traces.push_back(gen::two_pass_trace(rng, world, "u2", 1 + rng.below(200)));
    IdentifierSets ids = gen::two_pass_identifiers(rng, world, traces, profile, real_resources());

    TwoPassResult got = detect_two_pass(traces, ids, profile, real_resources());
    TwoPassResult want = oracle::two_pass(traces, ids, profile, real_resources());
    if (got.sharing != want.sharing)
      o.fail("trial " + std::to_string(trial) + ": ID-sharing events differ (" + std::to_string(got.sharing.size()) +
             " vs " + std::to_string(want.sharing.size()) + ")");
    if (got.events != want.events)
      o.fail("trial " + std::to_string(trial) + ": sync events differ (" + std::to_string(got.events.size()) + " vs " +
             std::to_string(want.events.size()) + ")");
    sharing += got.sharing.size();
    events += got.events.size();

    // Subsumption, on GET requests where the two-pass method looks.
    if (profile.two_pass_count_mode != TwoPassCountMode::Entities)
      continue;
    std::map<std::pair<std::string, std::string>, std::set<Entity>> reach;
    for (const auto& ev : got.sharing)
      for (const auto& occ : ev.occurrences)
        reach[{ev.user_id, ev.token}].insert(occ.receiver);
    std::set<std::tuple<std::string, std::uint64_t, std::string, Location>> two_pass_keys;
    for (const auto& e : got.events)
      two_pass_keys.emplace(e.user_id, e.seq_no, e.shared_value, e.location);
    std::map<std::pair<std::string, std::uint64_t>, const HttpTransaction*> by_ref;
    for (const auto& t : traces)
      for (const auto& tx : t.transactions)
        by_ref[{t.user_id, tx.seq_no}] = &tx;
    for (const auto& e : detect_shared(traces, ids, profile, real_resources())) {
      if (by_ref.at({e.user_id, e.seq_no})->method != "GET")
        continue;
      auto it = reach.find({e.user_id, e.shared_value});
      if (it == reach.end() || it->second.size() < 2)
        continue;
      ++subsumed;
      if (!two_pass_keys.count({e.user_id, e.seq_no, e.shared_value, e.location}))
        o.fail("trial " + std::to_string(trial) + ": shared event at seq " + std::to_string(e.seq_no) +
               " missing from two-pass output");
    }
  }
  if (sharing == 0 || events == 0)
    o.fail("random traces produced no sharing (" + std::to_string(sharing) + ") or no events (" + std::to_string(events) + ")");
  if (subsumed == 0)
    o.fail("subsumption never exercised");
  if (o.pass)
    o.detail = "100 traces equal the pairwise oracle (" + std::to_string(sharing) + " ID-sharing, " +
               std::to_string(events) + " sync events); " + std::to_string(subsumed) + " shared events subsumed";
  return o;
}

Outcome presets() {
  Outcome o;
  struct Row {
    const char* name;
    std::size_t min_len;
    std::optional<std::size_t> max_len;
    std::optional<double> similarity;
    std::optional<int> expiry_days;
    std::optional<std::string> charset;
    std::string delimiters;
  };
  const std::vector<Row> table = {
      {"olejnik2014", 10, {}, {}, {}, {}, ""},
      {"acar2014", 0, {}, 0.33, 30, {}, "&;"},
      {"englehardt2016", 7, 100, 0.66, 90, "-_=", "&;"},
      {"fouad2020", 0, {}, {}, {}, "-_,.", "&;"},
      {"papadogiannakis2021", 5, {}, {}, {}, {}, "&;"},
      {"papadopoulos2019", 10, {}, {}, {}, {}, "&;"},
      {"nonstandard_headers", 8, {}, {}, {}, "-_=", "&;"},
      {"ghosh2015", 0, {}, {}, {}, {}, "&:"},
  };
  for (const Row& row : table) {
    auto p = builtin_profile(row.name);
    if (!p) {
      o.fail(std::string(row.name) + " missing");
      continue;
    }
    const FilterConfig& f = p->filters;
    std::optional<int> days;
    if (f.session.kind == SessionPolicy::Kind::DropExpiringBefore)
      days = f.session.days;
    std::string n = row.name;
    if (f.min_len != row.min_len)
      o.fail(n + " min_len " + std::to_string(f.min_len));
    if (f.max_len != row.max_len)
      o.fail(n + " max_len");
    if (f.similarity_threshold != row.similarity)
      o.fail(n + " similarity");
    if (days != row.expiry_days)
      o.fail(n + " expiry");
    if (f.charset_extra != row.charset)
      o.fail(n + " charset");
    if (f.delimiters != row.delimiters)
      o.fail(n + " delimiters " + f.delimiters);
    std::ifstream file(kData + "/profiles/" + n + ".profile");
    if (!file || parse_profile(file, n) != *p)
      o.fail(n + ".profile does not match the built-in preset");
  }
  auto has = [](const char* name, Location l) { return builtin_profile(name)->locations.has(l); };
  if (!has("papadogiannakis2021", Location::PostBody) || !builtin_profile("papadogiannakis2021")->filters.keywords)
    o.fail("papadogiannakis2021 must scan POST bodies with the keyword filter");
  if (!builtin_profile("papadopoulos2019")->detectors.two_pass ||
      builtin_profile("papadopoulos2019")->filters.session.kind != SessionPolicy::Kind::DropNoExpiry)
    o.fail("papadopoulos2019 must use the two-pass detector and drop session cookies");
  if (!has("acar2014", Location::RedirectLocation) || has("olejnik2014", Location::Path))
    o.fail("scan locations");
  if (!has("nonstandard_headers", Location::NonstandardHeader))
    o.fail("nonstandard_headers scan");
  if (o.pass)
    o.detail = std::to_string(table.size()) + " presets match the table and their shipped profile files";
  return o;
}

Outcome report_arithmetic() {
  Outcome o;
  SynthParams params = oracle_params(77, 60);
  params.n_transactions = 2000;
  SynthOutput out = generate(params);
  IdentifierSets ids = extract_identifiers(out.traces, synth_profile(), real_resources());
  std::vector<SyncEvent> all = detect_all(out.traces, ids, synth_profile(), real_resources());
  gen::Rng rng(8);
  std::size_t shuffles = 0;
  for (int subset = 0; subset < 10; ++subset) {
    std::vector<SyncEvent> events;
    for (const auto& e : all)
      if (subset == 0 || rng.chance(50))
        events.push_back(e);
    Report base = aggregate(events, out.traces, real_resources().psl);
    if (base.location_percent) {
      double sum = 0;
      for (double v : *base.location_percent)
        sum += v;
      if (std::fabs(sum - 100.0) > kPercentSumTolerance)
        o.fail("location percentages sum to " + std::to_string(sum));
    }
    std::size_t counted = 0;
    for (auto c : base.location_counts)
      counted += c;
    if (counted != base.total_events)
      o.fail("location counts do not add up");
    for (int k = 0; k < 10; ++k, ++shuffles) {
      auto shuffled = events;
      std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
      if (aggregate(shuffled, out.traces, real_resources().psl) != base)
        o.fail("shuffle changed the report");
    }
    if (report_from_json(render(base, ReportFormat::Json)) != base)
      o.fail("JSON round trip changed the report");
  }
  Report empty = aggregate({}, out.traces, real_resources().psl);
  if (empty.location_percent || report_from_json(render(empty, ReportFormat::Json)) != empty)
    o.fail("empty report");
  if (o.pass)
    o.detail = "percentages sum to 100 within 1e-9; " + std::to_string(shuffles) + " shuffles invariant; JSON round trip exact";
  return o;
}

Outcome ingestion_round_trip() {
  Outcome o;
  SynthParams params = oracle_params(9, 50);
  params.n_transactions = 3000;
  SynthOutput out = generate(params);
  std::stringstream buffer;
  write_trace_jsonl(buffer, out.traces);
  std::string first = buffer.str();
  IngestResult back = read_trace_jsonl(buffer);
  if (back.traces != out.traces)
    o.fail("re-ingested synth trace differs");
  std::stringstream again;
  write_trace_jsonl(again, back.traces);
  if (again.str() != first)
    o.fail("rewritten JSONL differs");

  IngestOptions options;
  options.on_error = ErrorPolicy::Fail;
  IngestResult har;
  try {
    har = load_har(kTestData + "/chrome_export.har", options);
  } catch (const std::exception& e) {
    o.fail(std::string("HAR fixture failed: ") + e.what());
    return o;
  }
  if (har.skipped != 0 || har.parsed == 0)
    o.fail("HAR fixture: " + std::to_string(har.skipped) + " skipped, " + std::to_string(har.parsed) + " parsed");
  if (o.pass)
    o.detail = std::to_string(out.traces[0].transactions.size() + out.traces[1].transactions.size()) +
               " synth transactions round-trip; HAR fixture " + std::to_string(har.parsed) + " parsed, 0 skipped, " +
               std::to_string(har.ignored) + " non-network ignored";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"walkthrough fixture", walkthrough},
      {"synthetic oracle", synthetic_oracle},
      {"filter pipeline properties", filter_properties},
      {"Ratcliff/Obershelp oracle", ratcliff},
      {"public suffix conformance", public_suffix},
      {"two-pass equivalence", two_pass},
      {"profile fidelity", presets},
      {"report arithmetic", report_arithmetic},
      {"ingestion round trip", ingestion_round_trip},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::printf("criterion %zu %-28s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
