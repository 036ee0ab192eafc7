#include <doctest.h>

#include <array>
#include <numeric>
#include <sstream>

#include "syncscope/detect.hpp"
#include "syncscope/error.hpp"
#include "syncscope/synth.hpp"

using namespace syncscope;

TEST_CASE("apportion by largest remainder") {
  std::array<double, 3> w{1, 1, 1};
  CHECK(apportion(10, w) == std::vector<std::size_t>{4, 3, 3});
  std::array<double, 2> skew{3, 1};
  CHECK(apportion(7, skew) == std::vector<std::size_t>{5, 2});
  std::array<double, 3> zero{0, 2, 0};
  CHECK(apportion(5, zero) == std::vector<std::size_t>{0, 5, 0});
  std::array<double, 6> six{1, 1, 1, 1, 1, 1};
  for (std::size_t total = 0; total < 50; ++total) {
    auto parts = apportion(total, six);
    CHECK(std::accumulate(parts.begin(), parts.end(), std::size_t{0}) == total);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  SynthParams p;
  p.n_users = 2;
  p.n_transactions = 500;
  p.plant_syncs = 18;
  SynthOutput a = generate(p);
  SynthOutput b = generate(p);
  CHECK(a.traces == b.traces);
  CHECK(a.truth.events == b.truth.events);
  p.seed = 2;
  CHECK_FALSE(generate(p).traces == a.traces);
  for (const auto& t : a.traces)
    CHECK(t.transactions.size() == 500);
  CHECK(a.truth.events.size() == 36);
}

TEST_CASE("infeasible parameters are rejected") {
  SynthParams p;
  p.n_users = 0;
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
  p = SynthParams{};
  p.id_length = 10;
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
  p = SynthParams{};
  p.plant_syncs = 5;
  p.n_trackers = 1;
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
  p = SynthParams{};
  p.plant_syncs = 5000;
  p.n_transactions = 100;
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
  p = SynthParams{};
  p.plant_syncs = 5;
  p.n_trackers = 4;
  p.plant_locations = {0, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
  p = SynthParams{};
  p.noise.shared_across_users = 2;
  CHECK_THROWS_AS(generate(p), InfeasibleParams);
}

TEST_CASE("planted events are found with the synthetic profile") {
  SynthParams p;
  p.n_users = 2;
  p.n_transactions = 1500;
  p.plant_syncs = 30;
  p.noise = {10, 2, 2, 2, 2, 2, 2};
  SynthOutput out = generate(p);
  Resources r = synth_resources();
  IdentifierSets ids = extract_identifiers(out.traces, synth_profile(), r);
  Score s = score(detect_shared(out.traces, ids, synth_profile(), r), out.truth);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.true_positives == 60);
}

TEST_CASE("score counts matches on user, sequence, value and location") {
  GroundTruth truth;
  truth.events.push_back({"u", 3, "V", Location::Path, {}, {}});
  SyncEvent hit;
  hit.user_id = "u";
  hit.seq_no = 3;
  hit.shared_value = "V";
  hit.location = Location::Path;
  SyncEvent miss = hit;
  miss.location = Location::QueryParam;
  std::vector<SyncEvent> detected = {hit, miss};
  Score s = score(detected, truth);
  CHECK(s.true_positives == 1);
  CHECK(s.false_positives == 1);
  CHECK(s.false_negatives == 0);
  CHECK(s.precision == 0.5);
  Score empty = score({}, GroundTruth{});
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
}

TEST_CASE("truth JSONL round trip") {
  SynthParams p;
  p.plant_syncs = 6;
  p.n_transactions = 300;
  GroundTruth truth = generate(p).truth;
  std::stringstream buffer;
  write_truth_jsonl(buffer, truth);
  GroundTruth back = read_truth_jsonl(buffer);
  CHECK(back == truth);
}
