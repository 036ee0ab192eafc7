#include "syncscope/identifiers.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "syncscope/ingest.hpp"
#include "syncscope/similarity.hpp"

namespace syncscope {

namespace {

bool domain_matches(std::string_view host, std::string_view owner) {
  if (host == owner)
    return true;
  return host.size() > owner.size() && host.compare(host.size() - owner.size(), owner.size(), owner) == 0 &&
         host[host.size() - owner.size() - 1] == '.';
}

bool record_order(const CookieRecord& a, const CookieRecord& b) {
  return std::tie(a.set_at_ms, a.owner, a.key, a.value, a.mechanism) <
         std::tie(b.set_at_ms, b.owner, b.key, b.value, b.mechanism);
}

struct Candidate {
  std::string value;
  std::string owner_host;
  Entity owner;
  std::string key;
  std::int64_t first_seen_ms = 0;
  std::vector<std::string> trail;
};

bool candidate_order(const Candidate& a, const Candidate& b) {
  return std::tie(a.first_seen_ms, a.value, a.owner_host, a.key) <
         std::tie(b.first_seen_ms, b.value, b.owner_host, b.key);
}

template <typename Pred>
void keep_if(std::vector<Candidate>& candidates, const char* stage, Pred pred) {
  std::vector<Candidate> kept;
  kept.reserve(candidates.size());
  for (auto& c : candidates) {
    if (!pred(c))
      continue;
    c.trail.emplace_back(stage);
    kept.push_back(std::move(c));
  }
  candidates = std::move(kept);
}

void snapshot(std::vector<StageSnapshot>* stages, const std::string& user, const char* stage,
              const std::vector<Candidate>& candidates) {
  if (!stages)
    return;
  StageSnapshot s{user, stage, {}};
  for (const auto& c : candidates)
    s.values.push_back(c.value);
  stages->push_back(std::move(s));
}

// Drops values similar to an earlier kept, different value. Exact repeats of
// a kept value survive.
void similarity_stage(std::vector<Candidate>& candidates, double threshold, SimilarityScope scope) {
  std::vector<const Candidate*> kept;
  std::vector<bool> keep(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    bool repeat = false;
    bool similar = false;
    for (const Candidate* w : kept) {
      if (scope == SimilarityScope::SameOwner && w->owner != c.owner)
        continue;
      if (w->value == c.value) {
        repeat = true;
        break;
      }
      if (ratcliff_obershelp(c.value, w->value) > threshold) {
        similar = true;
        break;
      }
    }
    if (similar)
      continue;
    keep[i] = true;
    if (!repeat)
      kept.push_back(&c);
  }
  std::size_t i = 0;
  keep_if(candidates, "similarity", [&](const Candidate&) { return keep[i++]; });
}

}  // namespace

CookieStore build_cookie_store(const Trace& trace, const Profile& profile, const PublicSuffixList& psl,
                               Diagnostics* diag) {
  std::vector<CookieRecord> all = http_cookie_records(trace, profile.include_request_echo, diag);
  std::vector<CookieRecord> js = ingest_js_cookies(trace, psl, diag);
  all.insert(all.end(), js.begin(), js.end());
  std::stable_sort(all.begin(), all.end(), record_order);

  CookieStore store;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::vector<const CookieRecord*> echoes;
  for (const CookieRecord& r : all) {
    if (r.mechanism == SetMechanism::HttpRequestEcho) {
      echoes.push_back(&r);
      continue;
    }
    auto [it, inserted] = index.emplace(std::tuple(r.owner, r.key, r.value), store.records.size());
    if (inserted)
      store.records.push_back(r);
  }
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> echo_index;
  for (const CookieRecord* e : echoes) {
    bool folded = false;
    for (auto& set : store.records) {
      if (set.mechanism == SetMechanism::HttpRequestEcho || set.key != e->key || set.value != e->value ||
          !domain_matches(e->owner, set.owner))
        continue;
      set.set_at_ms = std::min(set.set_at_ms, e->set_at_ms);
      folded = true;
      break;
    }
    if (folded)
      continue;
    auto [it, inserted] = echo_index.emplace(std::tuple(e->owner, e->key, e->value), store.records.size());
    if (inserted)
      store.records.push_back(*e);
  }
  std::stable_sort(store.records.begin(), store.records.end(), record_order);

  for (const CookieRecord& r : store.records) {
    KeyHistory& h = store.history[{r.owner, r.key}];
    if (std::find(h.values.begin(), h.values.end(), r.value) == h.values.end())
      h.values.push_back(r.value);
    if (split_on_delimiters(r.value, profile.filters.delimiters, profile.filters.unwraps_pairs()).size() > 1)
      h.multi_value = true;
  }
  return store;
}

IdentifierSets extract_identifiers(std::span<const Trace> traces, const Profile& profile,
                                   const Resources& resources, Diagnostics* diag,
                                   std::vector<StageSnapshot>* stages) {
  const FilterConfig& f = profile.filters;
  std::map<std::string, std::vector<Candidate>> per_user;

  for (const Trace& trace : traces) {
    const std::string& user = trace.user_id;
    CookieStore store = build_cookie_store(trace, profile, resources.psl, diag);
    std::vector<CookieRecord> records = store.records;
    if (f.session.kind != SessionPolicy::Kind::Keep)
      records = filter_session(records, f.session, trace.start_time_ms(), profile.echo_unknown_expiry_passes);

    std::vector<Candidate> candidates;
    for (const CookieRecord& r : records) {
      Entity owner = entity_or_host(r.owner, profile.entity_mode, resources.psl, resources.orgs);
      auto tokens = split_on_delimiters(r.value, f.delimiters, f.unwraps_pairs());
      for (auto& token : tokens) {
        Candidate c{std::move(token), r.owner, owner, r.key, r.set_at_ms, {}};
        if (f.session.kind != SessionPolicy::Kind::Keep)
          c.trail.emplace_back("session");
        if (!f.delimiters.empty())
          c.trail.emplace_back("delimiter");
        candidates.push_back(std::move(c));
      }
    }
    std::sort(candidates.begin(), candidates.end(), candidate_order);
    snapshot(stages, user, "delimiter", candidates);

    if (f.min_len > 0 || f.max_len) {
      keep_if(candidates, "length", [&](const Candidate& c) { return passes_length(c.value, f.min_len, f.max_len); });
      snapshot(stages, user, "length", candidates);
    }
    if (f.charset_extra) {
      keep_if(candidates, "charset", [&](const Candidate& c) { return passes_charset(c.value, *f.charset_extra); });
      snapshot(stages, user, "charset", candidates);
    }
    if (f.drop_multi_value_keys || f.drop_dynamic_keys) {
      keep_if(candidates, "key_stability", [&](const Candidate& c) {
        auto it = store.history.find({c.owner_host, c.key});
        return it == store.history.end() ||
               !key_is_unstable(it->second, f.drop_multi_value_keys, f.drop_dynamic_keys);
      });
      snapshot(stages, user, "key_stability", candidates);
    }
    if (f.keywords) {
      keep_if(candidates, "keyword", [&](const Candidate& c) { return !hits_keyword(c.value, *f.keywords, c.key); });
      snapshot(stages, user, "keyword", candidates);
    }
    if (f.similarity_threshold) {
      similarity_stage(candidates, *f.similarity_threshold, profile.similarity_scope);
      snapshot(stages, user, "similarity", candidates);
    }
    auto& bucket = per_user[user];
    bucket.insert(bucket.end(), std::make_move_iterator(candidates.begin()),
                  std::make_move_iterator(candidates.end()));
  }

  if (f.cross_user_dedup) {
    std::map<std::string, std::vector<std::string>> values;
    for (const auto& [user, candidates] : per_user) {
      auto& v = values[user];
      for (const auto& c : candidates)
        v.push_back(c.value);
    }
    auto survivors = filter_cross_user(values, diag);
    if (per_user.size() >= 2) {
      for (auto& [user, candidates] : per_user) {
        std::set<std::string> keep(survivors[user].begin(), survivors[user].end());
        keep_if(candidates, "cross_user", [&](const Candidate& c) { return keep.count(c.value) > 0; });
        snapshot(stages, user, "cross_user", candidates);
      }
    }
  }

  IdentifierSets result;
  for (auto& [user, candidates] : per_user) {
    std::sort(candidates.begin(), candidates.end(), candidate_order);
    auto& ids = result[user];
    std::set<std::pair<std::string, Entity>> seen;
    for (auto& c : candidates) {
      if (!seen.emplace(c.value, c.owner).second)
        continue;
      ids.push_back({std::move(c.value), std::move(c.owner), std::move(c.owner_host), std::move(c.key),
                     user, std::move(c.trail), c.first_seen_ms});
    }
  }
  return result;
}

void write_identifiers_jsonl(std::ostream& out, const IdentifierSets& identifiers) {
  using ojson = nlohmann::ordered_json;
  for (const auto& [user, ids] : identifiers) {
    for (const Identifier& id : ids) {
      ojson line;
      line["user"] = user;
      line["owner"] = id.owner.name;
      line["key"] = id.source_key;
      line["value"] = id.value;
      line["filters"] = id.filter_trail;
      out << line.dump() << '\n';
    }
  }
}

}  // namespace syncscope
