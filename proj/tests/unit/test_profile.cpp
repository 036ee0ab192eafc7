#include <doctest.h>

#include <sstream>

#include "syncscope/error.hpp"
#include "syncscope/profile.hpp"

using namespace syncscope;

TEST_CASE("every preset renders and parses back to itself") {
  for (const auto& name : preset_names()) {
    INFO(name);
    Profile p = *builtin_profile(name);
    CHECK_NOTHROW(p.validate());
    std::istringstream in(render_profile(p));
    CHECK(parse_profile(in) == p);
  }
}

TEST_CASE("extends seeds from a preset") {
  std::istringstream in("extends = englehardt2016\n# tweak\nmin_len = 2\nlocations = query,redirect\n");
  Profile p = parse_profile(in);
  CHECK(p.filters.min_len == 2);
  CHECK(p.filters.max_len == 100);
  CHECK(p.locations.has(Location::RedirectLocation));
  CHECK_FALSE(p.locations.has(Location::Path));
}

TEST_CASE("profile errors carry the line number") {
  std::istringstream in("min_len = 3\nbogus = 1\n");
  try {
    parse_profile(in, "x.profile");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.index() == 2);
  }
  std::istringstream late("min_len = 3\nextends = acar2014\n");
  CHECK_THROWS_AS(parse_profile(late), ParseError);
}

TEST_CASE("apply_setting validates values") {
  Profile p;
  CHECK_THROWS_AS(apply_setting(p, "min_len", "-1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(p, "similarity", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(p, "locations", "query,nowhere"), ConfigError);
  apply_setting(p, "party_mode", "org");
  CHECK(p.entity_mode == EntityMode::Organization);
  apply_setting(p, "detectors", "two_pass");
  CHECK(p.detectors == DetectorSet{false, true, false});
  apply_setting(p, "charset", "alnum+-_");
  CHECK(p.filters.charset_extra == "-_");
}

TEST_CASE("validate rejects empty location and detector sets") {
  Profile p;
  p.locations = ScanLocationSet{};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = Profile{};
  p.detectors = {false, false, false};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("resolve_profile reports unknown names") {
  CHECK(resolve_profile("acar2014").name == "acar2014");
  CHECK_THROWS_AS(resolve_profile("no-such-preset"), ConfigError);
}
