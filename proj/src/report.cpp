#include "syncscope/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace syncscope {

namespace {

std::string site_of(const std::string& host, const PublicSuffixList& psl) {
  auto domain = psl.registrable_domain(host);
  return domain ? *domain : host;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double percent(std::size_t part, std::size_t whole) {
  return 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

constexpr std::array<DetectionMethod, 3> kMethods = {
    DetectionMethod::SharedIdHeuristic, DetectionMethod::TwoPassIdLooking, DetectionMethod::KnownPairList};

}  // namespace

Report aggregate(std::span<const SyncEvent> events, std::span<const Trace> traces, const PublicSuffixList& psl,
                 std::size_t top_k) {
  std::map<std::pair<std::string, std::uint64_t>, const HttpTransaction*> by_ref;
  std::set<std::string> visited;
  for (const Trace& trace : traces) {
    for (const HttpTransaction& tx : trace.transactions) {
      by_ref.emplace(std::pair(tx.user_id, tx.seq_no), &tx);
      visited.insert(site_of(tx.landing_page.host, psl));
    }
  }

  Report r;
  r.websites_visited = visited.size();
  r.total_events = events.size();
  std::set<std::string> values, senders, receivers, first_parties, leak_sites, sync_sites;
  std::map<std::pair<std::string, std::string>, std::size_t> pairs;
  for (const SyncEvent& e : events) {
    auto it = by_ref.find({e.user_id, e.seq_no});
    if (it == by_ref.end())
      throw DanglingEvent("event references missing transaction " + e.user_id + "#" + std::to_string(e.seq_no));
    std::string site = site_of(it->second->landing_page.host, psl);
    if (!e.shared_value.empty())
      values.insert(e.shared_value);
    senders.insert(e.sender.name);
    receivers.insert(e.receiver.name);
    first_parties.insert(site);
    (e.relation == Relation::FirstPartyLeak ? leak_sites : sync_sites).insert(site);
    ++r.location_counts[static_cast<std::size_t>(e.location)];
    ++r.method_counts[static_cast<std::size_t>(e.method)];
    ++pairs[{e.sender.name, e.receiver.name}];
  }
  r.unique_values = values.size();
  r.unique_senders = senders.size();
  r.unique_receivers = receivers.size();
  r.first_parties = first_parties.size();
  r.first_party_leak_sites = leak_sites.size();
  r.third_party_sync_sites = sync_sites.size();
  if (r.total_events > 0) {
    std::array<double, 6> shares{};
    for (std::size_t i = 0; i < shares.size(); ++i)
      shares[i] = percent(r.location_counts[i], r.total_events);
    r.location_percent = shares;
  }
  if (r.websites_visited > 0) {
    r.first_party_leak_site_percent = percent(r.first_party_leak_sites, r.websites_visited);
    r.third_party_sync_site_percent = percent(r.third_party_sync_sites, r.websites_visited);
  }

  for (const auto& [pair, count] : pairs)
    r.top_pairs.push_back({pair.first, pair.second, count});
  std::stable_sort(r.top_pairs.begin(), r.top_pairs.end(),
                   [](const PairCount& a, const PairCount& b) { return a.count > b.count; });
  if (r.top_pairs.size() > top_k)
    r.top_pairs.resize(top_k);
  return r;
}

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  if (s == "json")
    return ReportFormat::Json;
  if (s == "csv")
    return ReportFormat::Csv;
  if (s == "text")
    return ReportFormat::Text;
  return std::nullopt;
}

namespace {

nlohmann::ordered_json to_json(const Report& r) {
  using ojson = nlohmann::ordered_json;
  ojson j;
  j["totals"] = {{"events", r.total_events},
                 {"unique_values", r.unique_values},
                 {"unique_senders", r.unique_senders},
                 {"unique_receivers", r.unique_receivers},
                 {"first_parties", r.first_parties},
                 {"websites_visited", r.websites_visited}};
  ojson locations = ojson::array();
  for (std::size_t i = 0; i < kAllLocations.size(); ++i) {
    ojson row;
    row["location"] = to_string(kAllLocations[i]);
    row["count"] = r.location_counts[i];
    if (r.location_percent)
      row["percent"] = (*r.location_percent)[i];
    locations.push_back(std::move(row));
  }
  j["locations"] = std::move(locations);
  ojson methods = ojson::object();
  for (std::size_t i = 0; i < kMethods.size(); ++i)
    methods[std::string(to_string(kMethods[i]))] = r.method_counts[i];
  j["methods"] = std::move(methods);
  auto site_entry = [](std::size_t count, const std::optional<double>& pct) {
    ojson e;
    e["sites"] = count;
    if (pct)
      e["percent"] = *pct;
    return e;
  };
  j["websites"] = {{"first_party_leak", site_entry(r.first_party_leak_sites, r.first_party_leak_site_percent)},
                   {"third_party_sync", site_entry(r.third_party_sync_sites, r.third_party_sync_site_percent)}};
  ojson top = ojson::array();
  for (const auto& p : r.top_pairs)
    top.push_back({{"sender", p.sender}, {"receiver", p.receiver}, {"count", p.count}});
  j["top_pairs"] = std::move(top);
  return j;
}

std::string render_text(const Report& r) {
  std::ostringstream out;
  out << "events:           " << r.total_events << '\n'
      << "unique values:    " << r.unique_values << '\n'
      << "unique senders:   " << r.unique_senders << '\n'
      << "unique receivers: " << r.unique_receivers << '\n'
      << "first parties:    " << r.first_parties << " of " << r.websites_visited << " websites visited\n";
  out << "\nlocations\n";
  for (std::size_t i = 0; i < kAllLocations.size(); ++i) {
    out << "  " << to_string(kAllLocations[i]) << ": " << r.location_counts[i];
    if (r.location_percent)
      out << " (" << fixed3((*r.location_percent)[i]) << "%)";
    out << '\n';
  }
  out << "\nmethods\n";
  for (std::size_t i = 0; i < kMethods.size(); ++i)
    out << "  " << to_string(kMethods[i]) << ": " << r.method_counts[i] << '\n';
  out << "\nwebsites\n";
  auto site_line = [&](const char* label, std::size_t n, const std::optional<double>& pct) {
    out << "  " << label << ": " << n;
    if (pct)
      out << " (" << fixed3(*pct) << "%)";
    out << '\n';
  };
  site_line("first_party_leak", r.first_party_leak_sites, r.first_party_leak_site_percent);
  site_line("third_party_sync", r.third_party_sync_sites, r.third_party_sync_site_percent);
  if (!r.top_pairs.empty()) {
    out << "\ntop sender -> receiver pairs\n";
    for (const auto& p : r.top_pairs)
      out << "  " << p.sender << " -> " << p.receiver << ": " << p.count << '\n';
  }
  return out.str();
}

std::string render_csv(const Report& r) {
  std::ostringstream out;
  out << "location,count,percent\n";
  for (std::size_t i = 0; i < kAllLocations.size(); ++i) {
    out << to_string(kAllLocations[i]) << ',' << r.location_counts[i] << ',';
    if (r.location_percent)
      out << fixed3((*r.location_percent)[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace

std::string render(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::Csv:
      return render_csv(report);
    case ReportFormat::Text:
      return render_text(report);
  }
  return {};
}

Report report_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError("<report>", 0, "not a JSON object");
  try {
    Report r;
    const auto& t = j.at("totals");
    r.total_events = t.at("events").get<std::size_t>();
    r.unique_values = t.at("unique_values").get<std::size_t>();
    r.unique_senders = t.at("unique_senders").get<std::size_t>();
    r.unique_receivers = t.at("unique_receivers").get<std::size_t>();
    r.first_parties = t.at("first_parties").get<std::size_t>();
    r.websites_visited = t.at("websites_visited").get<std::size_t>();
    std::array<double, 6> shares{};
    bool have_shares = false;
    for (const auto& row : j.at("locations")) {
      auto loc = location_from_string(row.at("location").get<std::string>());
      if (!loc)
        throw ParseError("<report>", 0, "unknown location");
      auto i = static_cast<std::size_t>(*loc);
      r.location_counts[i] = row.at("count").get<std::size_t>();
      if (row.contains("percent")) {
        shares[i] = row["percent"].get<double>();
        have_shares = true;
      }
    }
    if (have_shares)
      r.location_percent = shares;
    for (const auto& [name, count] : j.at("methods").items()) {
      auto m = detection_method_from_string(name);
      if (!m)
        throw ParseError("<report>", 0, "unknown method " + name);
      r.method_counts[static_cast<std::size_t>(*m)] = count.get<std::size_t>();
    }
    const auto& w = j.at("websites");
    r.first_party_leak_sites = w.at("first_party_leak").at("sites").get<std::size_t>();
    r.third_party_sync_sites = w.at("third_party_sync").at("sites").get<std::size_t>();
    if (w["first_party_leak"].contains("percent"))
      r.first_party_leak_site_percent = w["first_party_leak"]["percent"].get<double>();
    if (w["third_party_sync"].contains("percent"))
      r.third_party_sync_site_percent = w["third_party_sync"]["percent"].get<double>();
    for (const auto& p : j.at("top_pairs"))
      r.top_pairs.push_back(
          {p.at("sender").get<std::string>(), p.at("receiver").get<std::string>(), p.at("count").get<std::size_t>()});
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("<report>", 0, ex.what());
  }
}

}  // namespace syncscope
