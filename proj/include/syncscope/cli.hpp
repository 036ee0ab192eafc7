#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "syncscope/detect.hpp"
#include "syncscope/identifiers.hpp"
#include "syncscope/ingest.hpp"
#include "syncscope/profile.hpp"
#include "syncscope/report.hpp"
#include "syncscope/synth.hpp"

namespace syncscope {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIngest = 2;

enum class InputFormat { Auto, Har, Jsonl };

std::optional<InputFormat> input_format_from_string(std::string_view s);

struct RunConfig {
  std::vector<std::string> inputs;  // "-" reads trace JSONL from stdin
  InputFormat format = InputFormat::Auto;
  std::string profile = "englehardt2016";
  std::vector<std::string> settings;  // "key=value", applied in order
  std::optional<std::string> party_mode;
  std::optional<std::filesystem::path> psl;
  std::optional<std::filesystem::path> orgs;
  std::optional<std::filesystem::path> keywords;
  std::optional<std::filesystem::path> pairs;
  std::optional<std::string> detectors;  // comma list
  std::filesystem::path out_dir = "syncscope-out";
  ReportFormat report_format = ReportFormat::Text;
  ErrorPolicy on_error = ErrorPolicy::Fail;
};

// `key = value` lines overriding the matching flags; `set` and `input` may
// repeat. Throws ConfigError.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// SYNCSCOPE_DATA_DIR, else the directory configured at build time.
std::filesystem::path data_dir();

// Profile with every override applied, plus the resources it needs.
// Throws ConfigError.
struct Prepared {
  Profile profile;
  Resources resources;
  std::optional<PairList> pairs;
};
Prepared prepare(const RunConfig& config);

// Ingests every input. Traces of one user may not span several inputs.
std::vector<Trace> load_inputs(const RunConfig& config, std::istream& in, std::ostream& err);

// Writes identifiers.jsonl, events.jsonl and report.{json,csv,txt} to
// out_dir and the rendered report to `out`.
int run_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

// Identifier JSONL to `out`.
int run_extract_ids(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

// Trace JSONL to `trace_path` (or `out` when unset), truth JSONL to
// `truth_path` when set.
int run_synth(const SynthParams& params, const std::optional<std::filesystem::path>& trace_path,
              const std::optional<std::filesystem::path>& truth_path, std::ostream& out, std::ostream& err);

int run_score(const std::filesystem::path& events, const std::filesystem::path& truth, std::ostream& out,
              std::ostream& err);

// Report over an events file and the traces it refers to.
int run_report(const RunConfig& config, const std::filesystem::path& events, std::istream& in, std::ostream& out,
               std::ostream& err);

}  // namespace syncscope
