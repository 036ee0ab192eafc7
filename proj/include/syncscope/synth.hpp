#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "syncscope/identifiers.hpp"
#include "syncscope/model.hpp"
#include "syncscope/profile.hpp"

namespace syncscope {

// Cookie values each filter stage must remove. Every noise value is also
// leaked to a third party, so a stage that fails shows up as a false
// positive.
struct SynthNoise {
  std::size_t non_identifier_tokens = 0;  // random ID-looking tokens that no cookie holds
  std::size_t dynamic_keys = 0;           // cookie re-set with a new value
  std::size_t session_cookies = 0;        // no expiry
  std::size_t shared_across_users = 0;    // same value for every user
  std::size_t short_values = 0;
  std::size_t timestamp_values = 0;
  std::size_t multi_value_keys = 0;

  bool operator==(const SynthNoise&) const = default;
};

struct SynthParams {
  std::uint64_t seed = 1;
  std::size_t n_users = 1;
  std::size_t n_transactions = 1000;  // per user
  std::size_t n_trackers = 8;
  std::size_t n_publishers = 4;
  std::size_t plant_syncs = 0;  // per user
  // Relative weights in Location order.
  std::array<double, 6> plant_locations = {1, 1, 1, 1, 1, 1};
  std::size_t id_length = 16;
  SynthNoise noise;

  bool operator==(const SynthParams&) const = default;
};

struct PlantedEvent {
  std::string user_id;
  std::uint64_t seq_no = 0;
  std::string value;
  Location location = Location::QueryParam;
  std::string sender;
  std::string receiver;

  auto operator<=>(const PlantedEvent&) const = default;
};

struct PlantedIdentifier {
  std::string user_id;
  std::string owner;
  std::string key;
  std::string value;

  auto operator<=>(const PlantedIdentifier&) const = default;
};

struct GroundTruth {
  std::vector<PlantedEvent> events;  // sorted
  std::vector<PlantedIdentifier> identifiers;  // sorted

  bool operator==(const GroundTruth&) const = default;
};

struct SynthOutput {
  std::vector<Trace> traces;  // seq_no numbered as written by write_trace_jsonl
  GroundTruth truth;
};

// The profile generated traces are co-validated against: all six locations,
// every filter stage enabled, eTLD+1 entities.
Profile synth_profile();

// Suffix rules for the synthetic domains.
Resources synth_resources();

// Splits `total` in proportion to `weights` by largest remainder; ties go to
// the lower index.
std::vector<std::size_t> apportion(std::size_t total, std::span<const double> weights);

// Deterministic in `params`. Throws InfeasibleParams when the parameters
// conflict or a planted identifier would not survive synth_profile().
SynthOutput generate(const SynthParams& params);

struct Score {
  double precision = 1.0;
  double recall = 1.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

// Matches on (user, seq_no, value, location). An empty denominator counts
// as 1.0.
Score score(std::span<const SyncEvent> detected, const GroundTruth& truth);

// {"kind":"event",...} and {"kind":"identifier",...} lines.
void write_truth_jsonl(std::ostream& out, const GroundTruth& truth);
GroundTruth read_truth_jsonl(std::istream& in, std::string_view source = "<truth>");

}  // namespace syncscope
