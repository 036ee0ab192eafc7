#include <doctest.h>

#include "syncscope/cookie.hpp"
#include "syncscope/error.hpp"

using namespace syncscope;

TEST_CASE("parse_http_date accepts the three HTTP date formats") {
  const std::int64_t want = 784111777000;  // 1994-11-06T08:49:37Z
  CHECK(parse_http_date("Sun, 06 Nov 1994 08:49:37 GMT") == want);
  CHECK(parse_http_date("Sunday, 06-Nov-94 08:49:37 GMT") == want);
  CHECK(parse_http_date("Sun Nov  6 08:49:37 1994") == want);
  CHECK(parse_http_date("Sun, 06-Nov-1994 08:49:37 GMT") == want);
  CHECK_FALSE(parse_http_date("yesterday").has_value());
}

TEST_CASE("parse_set_cookie reads attributes") {
  CookieRecord r = parse_set_cookie("uid=AbC123; Max-Age=60; Expires=Sun, 06 Nov 1994 08:49:37 GMT; Domain=.Tracker.com; Path=/",
                                    "sync.tracker.com", 1000, "u1");
  CHECK(r.key == "uid");
  CHECK(r.value == "AbC123");
  CHECK(r.owner == "tracker.com");
  CHECK(r.max_age_s == 60);
  CHECK(r.effective_expiry_ms() == 61000);
  CHECK(r.user_id == "u1");

  CookieRecord host_only = parse_set_cookie("sid=x", "a.example.com", 0, "u1");
  CHECK(host_only.owner == "a.example.com");
  CHECK_FALSE(host_only.has_expiry());
  CHECK_THROWS_AS(parse_set_cookie("novalue; Path=/", "a.example.com", 0, "u1"), MalformedCookie);
}

TEST_CASE("parse_cookie_header skips pairs without =") {
  std::size_t skipped = 0;
  auto records = parse_cookie_header("a=1; junk; b=x=y", "h.example.com", 5, "u", &skipped);
  REQUIRE(records.size() == 2);
  CHECK(records[1].value == "x=y");
  CHECK(records[0].mechanism == SetMechanism::HttpRequestEcho);
  CHECK(skipped == 1);
}
