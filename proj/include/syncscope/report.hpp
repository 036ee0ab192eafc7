#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syncscope/model.hpp"
#include "syncscope/public_suffix.hpp"

namespace syncscope {

struct PairCount {
  std::string sender;
  std::string receiver;
  std::size_t count = 0;

  bool operator==(const PairCount&) const = default;
};

struct Report {
  std::size_t total_events = 0;
  std::size_t unique_values = 0;  // distinct non-empty shared values
  std::size_t unique_senders = 0;
  std::size_t unique_receivers = 0;
  std::size_t first_parties = 0;  // distinct landing eTLD+1s with any event
  std::size_t websites_visited = 0;

  std::array<std::size_t, 6> location_counts{};  // Location order
  std::optional<std::array<double, 6>> location_percent;  // absent when no events
  std::array<std::size_t, 3> method_counts{};  // DetectionMethod order

  std::size_t first_party_leak_sites = 0;
  std::size_t third_party_sync_sites = 0;
  // Share of visited websites; absent when no website was visited.
  std::optional<double> first_party_leak_site_percent;
  std::optional<double> third_party_sync_site_percent;

  std::vector<PairCount> top_pairs;  // count desc, then sender, receiver

  bool operator==(const Report&) const = default;
};

// Pure fold over `events`. Landing pages are grouped by eTLD+1, falling back
// to the host. Throws DanglingEvent when an event names a (user, seq_no)
// absent from `traces`.
Report aggregate(std::span<const SyncEvent> events, std::span<const Trace> traces,
                 const PublicSuffixList& psl, std::size_t top_k = 10);

enum class ReportFormat { Json, Csv, Text };

std::optional<ReportFormat> report_format_from_string(std::string_view s);

// Byte-stable for a given report. CSV is the location table.
std::string render(const Report& report, ReportFormat format);

// Inverse of the JSON rendering. Throws ParseError.
Report report_from_json(std::string_view text);

}  // namespace syncscope
