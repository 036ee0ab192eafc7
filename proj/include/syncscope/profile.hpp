#pragma once

#include <bitset>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "syncscope/entity.hpp"
#include "syncscope/filters.hpp"
#include "syncscope/model.hpp"

namespace syncscope {

// Where detectors look for shared values. Headers named in
// `standard_headers` (lowercase) are never scanned as nonstandard.
struct ScanLocationSet {
  std::bitset<6> flags;
  std::set<std::string> standard_headers = default_standard_headers();

  bool has(Location location) const { return flags.test(static_cast<std::size_t>(location)); }
  void set(Location location, bool on = true) { flags.set(static_cast<std::size_t>(location), on); }
  bool any() const { return flags.any(); }

  static ScanLocationSet all();
  static ScanLocationSet of(std::initializer_list<Location> locations);
  static std::set<std::string> default_standard_headers();

  bool operator==(const ScanLocationSet&) const = default;
};

enum class PartyStrategy { StringMatch, Etld1, Organization };

std::string_view to_string(PartyStrategy strategy);
std::optional<PartyStrategy> party_strategy_from_string(std::string_view s);
EntityMode entity_mode_for(PartyStrategy strategy);

enum class TwoPassCountMode { Entities, Requests };
enum class SimilarityScope { AllWithinUser, SameOwner };

struct DetectorSet {
  bool shared = true;
  bool two_pass = false;
  bool known_pairs = false;

  bool operator==(const DetectorSet&) const = default;
};

// Complete parameterization of one detection heuristic.
struct Profile {
  std::string name = "custom";
  FilterConfig filters;
  ScanLocationSet locations = ScanLocationSet::of({Location::QueryParam});
  EntityMode entity_mode = EntityMode::Etld1;
  PartyStrategy party_strategy = PartyStrategy::Etld1;
  bool include_request_echo = true;
  bool echo_unknown_expiry_passes = true;
  // Additionally require the request to be third-party to the landing page.
  bool require_third_party_receiver = false;
  SimilarityScope similarity_scope = SimilarityScope::AllWithinUser;
  TwoPassCountMode two_pass_count_mode = TwoPassCountMode::Entities;
  bool two_pass_include_redirects = false;
  DetectorSet detectors;

  // Throws ConfigError.
  void validate() const;

  bool operator==(const Profile&) const = default;
};

const std::vector<std::string>& preset_names();
std::optional<Profile> builtin_profile(std::string_view name);

// Applies one `key = value` setting. Throws ConfigError on unknown keys or
// bad values.
void apply_setting(Profile& profile, std::string_view key, std::string_view value);

// `key = value` lines, `#` comments. An `extends = <preset>` line, if any,
// must come first and seeds the profile from a built-in preset.
Profile parse_profile(std::istream& in, std::string_view source = "<profile>");
Profile load_profile(const std::filesystem::path& path);

// Built-in preset by name, else a profile file at that path.
Profile resolve_profile(std::string_view name_or_path);

// Serializes every field in the format parse_profile reads.
std::string render_profile(const Profile& profile);

}  // namespace syncscope
