#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "syncscope/identifiers.hpp"
#include "syncscope/ingest.hpp"
#include "syncscope/model.hpp"

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  std::string chars(std::string_view alphabet, std::size_t length) {
    std::string s(length, ' ');
    for (auto& c : s)
      c = alphabet[below(alphabet.size())];
    return s;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline syncscope::HttpTransaction make_tx(std::uint64_t seq, std::int64_t ts, const std::string& user,
                                          const std::string& landing, const std::string& url) {
  syncscope::HttpTransaction tx;
  tx.seq_no = seq;
  tx.timestamp_ms = ts;
  tx.user_id = user;
  tx.landing_page = syncscope::parse_url(landing);
  tx.url = syncscope::parse_url(url);
  tx.response_status = 200;
  return tx;
}

inline void set_referer(syncscope::HttpTransaction& tx, const std::string& url) {
  tx.request_headers.emplace_back("referer", url);
  tx.referer = syncscope::parse_url(url);
}

inline void set_cookie(syncscope::HttpTransaction& tx, const std::string& line) {
  tx.response_headers.emplace_back("set-cookie", line);
  tx.set_cookie_lines.push_back(line);
}

// Small host and token pools so that tokens recur across receivers.
struct TwoPassWorld {
  std::vector<std::string> hosts = {"a.t1.com", "b.t1.com",  "t2.com",     "x.t3.co.uk",
                                    "t4.net",   "192.0.2.7", "cdn.t4.net", "www.site.org"};
  std::vector<std::string> landings = {"https://www.site.org/", "https://news.example.com/a"};
  std::vector<std::string> tokens = {"XYXYXYXYXYXY", "abcdef123456", "short",      "Q9w8e7r6t5y4",
                                     "id-with_dash", "k3y=v4lue99", "ABCDEFGHIJKLMNOP", "12345678901",
                                     "zz",           "tok~tilde000", "Zr8Kq2mW5xTn4Lp0", "px.gif"};
};

inline std::string token_run(Rng& rng, const TwoPassWorld& w) {
  std::string s = rng.pick(w.tokens);
  if (rng.chance(15))
    s += std::string(1, "&;"[rng.below(2)]) + rng.pick(w.tokens);
  return s;
}

inline syncscope::Trace two_pass_trace(Rng& rng, const TwoPassWorld& w, const std::string& user,
                                       std::size_t n_tx) {
  syncscope::Trace trace;
  trace.user_id = user;
  for (std::size_t i = 0; i < n_tx; ++i) {
    std::string url = "https://" + rng.pick(w.hosts) + "/";
    for (std::size_t k = rng.below(3); k > 0; --k)
      url += rng.pick(w.tokens) + "/";
    std::size_t params = rng.below(4);
    for (std::size_t k = 0; k < params; ++k)
      url += std::string(k == 0 ? "?" : "&") + "p" + std::to_string(k) + "=" + token_run(rng, w);
    auto tx = make_tx(i, 1'700'000'000'000 + static_cast<std::int64_t>(i) * 10, user, rng.pick(w.landings), url);
    if (rng.chance(15))
      tx.method = "POST";
    if (rng.chance(50))
      set_referer(tx, "https://" + rng.pick(w.hosts) + "/r?x=" + token_run(rng, w));
    if (rng.chance(15)) {
      tx.response_status = 302;
      tx.response_headers.emplace_back("location", "https://" + rng.pick(w.hosts) + "/m?u=" + token_run(rng, w));
    }
    trace.transactions.push_back(std::move(tx));
  }
  return trace;
}

inline syncscope::IdentifierSets two_pass_identifiers(Rng& rng, const TwoPassWorld& w,
                                                      std::span<const syncscope::Trace> traces,
                                                      const syncscope::Profile& profile,
                                                      const syncscope::Resources& resources) {
  syncscope::IdentifierSets out;
  for (const auto& trace : traces) {
    auto& ids = out[trace.user_id];
    for (std::size_t k = rng.below(6); k > 0; --k) {
      const std::string& host = rng.pick(w.hosts);
      syncscope::Identifier id;
      id.value = rng.pick(w.tokens);
      id.owner_host = host;
      id.owner = syncscope::entity_or_host(host, profile.entity_mode, resources.psl, resources.orgs);
      id.source_key = "k" + std::to_string(k);
      id.user_id = trace.user_id;
      bool dup = false;
      for (const auto& other : ids)
        dup |= other.value == id.value && other.owner == id.owner;
      if (!dup)
        ids.push_back(std::move(id));
    }
  }
  return out;
}

// Cookie traffic exercising every filter stage.
inline std::string cookie_value(Rng& rng) {
  static constexpr std::string_view kAlnum = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
  switch (rng.below(9)) {
    case 0:
      return rng.chars(kAlnum, rng.below(6));
    case 1:
      return rng.chars(kAlnum, 8 + rng.below(10)) + "&" + rng.chars(kAlnum, 8 + rng.below(10));
    case 2:
      return std::to_string(1'600'000'000 + rng.below(100'000'000));
    case 3:
      return "2026-0" + std::to_string(1 + rng.below(9)) + "-1" + std::to_string(rng.below(10));
    case 4:
      return "https%3A%2F%2Fexample.com%2Fa.js";
    case 5:
      return rng.chars("ab-_=.,:", 6 + rng.below(14));
    case 6:
      return "GA1.2." + std::to_string(rng.below(1'000'000'000)) + "." + std::to_string(rng.below(1'000'000));
    default:
      return rng.chars(kAlnum, 6 + rng.below(30));
  }
}

inline std::vector<syncscope::Trace> cookie_traces(Rng& rng, std::size_t users) {
  static const std::vector<std::string> hosts = {"t1.com", "sync.t1.com", "t2.net", "www.pub.org", "ads.t3.co.uk"};
  static const std::vector<std::string> keys = {"uid", "sid", "_ga", "prefs", "lang", "euconsent", "ts", "v"};
  std::vector<std::string> shared;
  for (int i = 0; i < 3; ++i)
    shared.push_back(cookie_value(rng));
  std::vector<syncscope::Trace> traces;
  for (std::size_t u = 0; u < users; ++u) {
    syncscope::Trace trace;
    trace.user_id = "u" + std::to_string(u);
    std::size_t n = 1 + rng.below(25);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string& host = rng.pick(hosts);
      auto tx = make_tx(i, 1'700'000'000'000 + static_cast<std::int64_t>(i) * 1000, trace.user_id,
                        "https://www.pub.org/", "https://" + host + "/p");
      for (std::size_t k = rng.below(4); k > 0; --k) {
        std::string value = rng.chance(10) ? rng.pick(shared) : cookie_value(rng);
        std::string line = rng.pick(keys) + "=" + value;
        switch (rng.below(4)) {
          case 0:
            line += "; Max-Age=" + std::to_string(rng.below(400) * 86400);
            break;
          case 1:
            line += "; Expires=Wed, 21 Oct 2026 07:28:00 GMT";
            break;
          case 2:
            line += "; Expires=Fri, 01 Jan 2100 00:00:00 GMT";
            break;
          default:
            break;
        }
        if (rng.chance(30))
          line += "; Domain=." + host.substr(host.find('.') == host.rfind('.') ? 0 : host.find('.') + 1);
        set_cookie(tx, line);
      }
      if (rng.chance(20))
        tx.request_headers.emplace_back("cookie", rng.pick(keys) + "=" + cookie_value(rng));
      trace.transactions.push_back(std::move(tx));
    }
    if (rng.chance(50))
      trace.js_cookie_sets.push_back({1'700'000'000'500, "https://www.pub.org/", "jsid=" + cookie_value(rng) + "; Max-Age=99999999"});
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace gen
