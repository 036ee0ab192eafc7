#include <iostream>
#include <algorithm>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "syncscope/cli.hpp"

using namespace syncscope;

namespace {

void add_run_options(CLI::App* cmd, RunConfig& config, std::string& format, std::string& on_error,
                     std::string& config_file) {
  cmd->add_option("inputs", config.inputs, "Trace files (.har or .jsonl; - for stdin)");
  cmd->add_option("--format", format, "Input format")->check(CLI::IsMember({"auto", "har", "jsonl"}));
  cmd->add_option("--on-error", on_error, "Malformed records")->check(CLI::IsMember({"fail", "skip"}));
  cmd->add_option("--profile", config.profile, "Preset name or profile file");
  cmd->add_option("--set", config.settings, "Profile override key=value (repeatable)")->allow_extra_args(false);
  cmd->add_option("--party-mode", config.party_mode, "string, etld1 or org");
  cmd->add_option("--psl", config.psl, "Public suffix list");
  cmd->add_option("--orgs", config.orgs, "Domain-to-organization TSV");
  cmd->add_option("--keywords", config.keywords, "Keyword blocklist");
  cmd->add_option("--config", config_file, "key = value file overriding flags");
}

int finish_run_config(RunConfig& config, const std::string& format, const std::string& on_error,
                      const std::string& config_file) {
  config.format = *input_format_from_string(format);
  config.on_error = on_error == "skip" ? ErrorPolicy::Skip : ErrorPolicy::Fail;
  if (!config_file.empty()) {
    try {
      apply_config_file(config, config_file);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitInvalid;
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cookie synchronization detection over captured web traffic"};
  app.require_subcommand(1);

  RunConfig config;
  std::string format = "auto";
  std::string on_error = "fail";
  std::string config_file;
  std::string report_format = "text";
  std::string events_path;

  auto* detect = app.add_subcommand("detect", "Extract identifiers, detect syncs, write a report");
  add_run_options(detect, config, format, on_error, config_file);
  detect->add_option("--pairs", config.pairs, "Known (referrer, request) pair TSV");
  detect->add_option("--detectors", config.detectors, "Comma list of shared, two-pass, known-pairs");
  detect->add_option("--out-dir", config.out_dir, "Directory for identifiers, events and report");
  detect->add_option("--report-format", report_format)->check(CLI::IsMember({"json", "csv", "text"}));

  auto* extract = app.add_subcommand("extract-ids", "Print the identifiers surviving the profile's filters");
  add_run_options(extract, config, format, on_error, config_file);

  auto* report = app.add_subcommand("report", "Aggregate an events file");
  add_run_options(report, config, format, on_error, config_file);
  report->add_option("--events", events_path, "Events JSONL")->required();
  report->add_option("--report-format", report_format)->check(CLI::IsMember({"json", "csv", "text"}));

  SynthParams params;
  std::optional<std::filesystem::path> trace_out, truth_out;
  std::vector<double> weights;
  auto* synth = app.add_subcommand("synth", "Generate traces with planted syncs");
  synth->add_option("--seed", params.seed);
  synth->add_option("--users", params.n_users);
  synth->add_option("--transactions", params.n_transactions, "Per user");
  synth->add_option("--trackers", params.n_trackers);
  synth->add_option("--publishers", params.n_publishers);
  synth->add_option("--plant", params.plant_syncs, "Planted syncs per user");
  synth->add_option("--plant-weights", weights, "Six weights in location order")->expected(6)->delimiter(',')->allow_extra_args(false);
  synth->add_option("--id-length", params.id_length);
  synth->add_option("--noise-tokens", params.noise.non_identifier_tokens);
  synth->add_option("--noise-dynamic", params.noise.dynamic_keys);
  synth->add_option("--noise-session", params.noise.session_cookies);
  synth->add_option("--noise-shared", params.noise.shared_across_users);
  synth->add_option("--noise-short", params.noise.short_values);
  synth->add_option("--noise-timestamp", params.noise.timestamp_values);
  synth->add_option("--noise-multi", params.noise.multi_value_keys);
  synth->add_option("--out", trace_out, "Trace JSONL (default stdout)");
  synth->add_option("--truth", truth_out, "Ground truth JSONL");

  std::filesystem::path score_events, score_truth;
  auto* score_cmd = app.add_subcommand("score", "Precision and recall against ground truth");
  score_cmd->add_option("--events", score_events)->required();
  score_cmd->add_option("--truth", score_truth)->required();

  std::string show;
  auto* profiles = app.add_subcommand("profiles", "List presets or print one");
  profiles->add_option("name", show, "Preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; every usage error is a validation error.
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  if (*synth) {
    if (!weights.empty())
      std::copy(weights.begin(), weights.end(), params.plant_locations.begin());
    return run_synth(params, trace_out, truth_out, std::cout, std::cerr);
  }
  if (*score_cmd)
    return run_score(score_events, score_truth, std::cout, std::cerr);
  if (*profiles) {
    if (show.empty()) {
      for (const auto& name : preset_names())
        std::cout << name << '\n';
      return kExitOk;
    }
    try {
      std::cout << render_profile(resolve_profile(show));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitInvalid;
    }
    return kExitOk;
  }

  config.report_format = *report_format_from_string(report_format);
  if (int rc = finish_run_config(config, format, on_error, config_file); rc != kExitOk)
    return rc;
  if (*detect)
    return run_detect(config, std::cin, std::cout, std::cerr);
  if (*extract)
    return run_extract_ids(config, std::cin, std::cout, std::cerr);
  return run_report(config, events_path, std::cin, std::cout, std::cerr);
}
