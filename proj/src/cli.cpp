#include "syncscope/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>

#ifndef SYNCSCOPE_DEFAULT_DATA_DIR
#define SYNCSCOPE_DEFAULT_DATA_DIR "data"
#endif

namespace syncscope {

namespace {

constexpr std::size_t kMaxWarnings = 20;

std::string_view trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos)
    return {};
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void print_warnings(const Diagnostics& diag, std::ostream& err) {
  for (std::size_t i = 0; i < diag.warnings.size() && i < kMaxWarnings; ++i)
    err << "warning: " << diag.warnings[i] << '\n';
  if (diag.warnings.size() > kMaxWarnings)
    err << "warning: " << diag.warnings.size() - kMaxWarnings << " more warnings suppressed\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("cannot open " + path.string());
  return in;
}

// Ingest failures are reported with exit code 2, everything else with 1.
struct IngestFailure : Error {
  using Error::Error;
};

}  // namespace

std::optional<InputFormat> input_format_from_string(std::string_view s) {
  if (s == "auto")
    return InputFormat::Auto;
  if (s == "har")
    return InputFormat::Har;
  if (s == "jsonl")
    return InputFormat::Jsonl;
  return std::nullopt;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key == "input") {
      config.inputs.push_back(value);
    } else if (key == "format") {
      auto f = input_format_from_string(value);
      if (!f)
        throw ConfigError("format must be auto, har or jsonl");
      config.format = *f;
    } else if (key == "profile") {
      config.profile = value;
    } else if (key == "set") {
      config.settings.push_back(value);
    } else if (key == "party-mode") {
      config.party_mode = value;
    } else if (key == "psl") {
      config.psl = value;
    } else if (key == "orgs") {
      config.orgs = value;
    } else if (key == "keywords") {
      config.keywords = value;
    } else if (key == "pairs") {
      config.pairs = value;
    } else if (key == "detectors") {
      config.detectors = value;
    } else if (key == "out-dir") {
      config.out_dir = value;
    } else if (key == "report-format") {
      auto f = report_format_from_string(value);
      if (!f)
        throw ConfigError("report-format must be json, csv or text");
      config.report_format = *f;
    } else if (key == "on-error") {
      if (value != "fail" && value != "skip")
        throw ConfigError("on-error must be fail or skip");
      config.on_error = value == "fail" ? ErrorPolicy::Fail : ErrorPolicy::Skip;
    } else {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": unknown key " + key);
    }
  }
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SYNCSCOPE_DATA_DIR"); env && *env)
    return env;
  return SYNCSCOPE_DEFAULT_DATA_DIR;
}

Prepared prepare(const RunConfig& config) {
  Prepared p;
  p.profile = resolve_profile(config.profile);
  for (const std::string& setting : config.settings) {
    auto eq = setting.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got " + setting);
    apply_setting(p.profile, setting.substr(0, eq), setting.substr(eq + 1));
  }
  if (config.party_mode)
    apply_setting(p.profile, "party_mode", *config.party_mode);
  if (config.keywords)
    apply_setting(p.profile, "keywords", config.keywords->string());
  if (config.detectors)
    apply_setting(p.profile, "detectors", *config.detectors);
  p.profile.validate();

  if (p.profile.detectors.known_pairs) {
    if (!config.pairs)
      throw ConfigError("the known-pairs detector needs --pairs");
    p.pairs = load_pair_list(*config.pairs);
  }

  p.resources.psl = PublicSuffixList::load(config.psl.value_or(data_dir() / "public_suffix_list.dat"));
  std::optional<std::filesystem::path> orgs = config.orgs;
  if (!orgs && p.profile.entity_mode == EntityMode::Organization &&
      std::filesystem::exists(data_dir() / "orgs.tsv"))
    orgs = data_dir() / "orgs.tsv";
  if (orgs)
    p.resources.orgs = load_org_map(*orgs);
  return p;
}

std::vector<Trace> load_inputs(const RunConfig& config, std::istream& in, std::ostream& err) {
  if (config.inputs.empty())
    throw ConfigError("no input files");
  std::vector<Trace> traces;
  std::set<std::string> users;
  for (const std::string& input : config.inputs) {
    InputFormat format = config.format;
    if (format == InputFormat::Auto)
      format = std::filesystem::path(input).extension() == ".har" ? InputFormat::Har : InputFormat::Jsonl;
    IngestOptions options;
    options.on_error = config.on_error;
    IngestResult result;
    try {
      if (input == "-") {
        if (format == InputFormat::Har)
          result = read_har(in, options, "<stdin>");
        else
          result = read_trace_jsonl(in, options, "<stdin>");
      } else if (!std::filesystem::exists(input)) {
        throw IngestFailure("no such input " + input);
      } else if (format == InputFormat::Har) {
        options.user_id = std::filesystem::path(input).stem().string();
        result = load_har(input, options);
      } else {
        result = load_trace_jsonl(input, options);
      }
    } catch (const ParseError& e) {
      throw IngestFailure(e.what());
    }
    print_warnings(result.diagnostics, err);
    if (result.skipped)
      err << "warning: " << input << ": skipped " << result.skipped << " malformed records\n";
    for (Trace& trace : result.traces) {
      if (!users.insert(trace.user_id).second)
        throw ConfigError("user " + trace.user_id + " appears in more than one input");
      traces.push_back(std::move(trace));
    }
  }
  return traces;
}

namespace {

template <typename Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const IngestFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitIngest;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}

const char* report_extension(ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return "report.json";
    case ReportFormat::Csv:
      return "report.csv";
    case ReportFormat::Text:
      break;
  }
  return "report.txt";
}

}  // namespace

int run_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(config);
    std::vector<Trace> traces = load_inputs(config, in, err);
    Diagnostics diag;
    IdentifierSets ids = extract_identifiers(traces, p.profile, p.resources, &diag);
    std::vector<SyncEvent> events =
        detect_all(traces, ids, p.profile, p.resources, p.pairs ? &*p.pairs : nullptr, &diag);
    print_warnings(diag, err);
    Report report = aggregate(events, traces, p.resources.psl);
    std::string rendered = render(report, config.report_format);

    std::filesystem::create_directories(config.out_dir);
    {
      auto f = open_out(config.out_dir / "identifiers.jsonl");
      write_identifiers_jsonl(f, ids);
    }
    {
      auto f = open_out(config.out_dir / "events.jsonl");
      write_events_jsonl(f, events);
    }
    {
      auto f = open_out(config.out_dir / report_extension(config.report_format));
      f << rendered;
    }
    out << rendered;
    return kExitOk;
  });
}

int run_extract_ids(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Prepared p = prepare(config);
    std::vector<Trace> traces = load_inputs(config, in, err);
    Diagnostics diag;
    IdentifierSets ids = extract_identifiers(traces, p.profile, p.resources, &diag);
    print_warnings(diag, err);
    write_identifiers_jsonl(out, ids);
    return kExitOk;
  });
}

int run_synth(const SynthParams& params, const std::optional<std::filesystem::path>& trace_path,
              const std::optional<std::filesystem::path>& truth_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SynthOutput synth = generate(params);
    if (trace_path) {
      auto f = open_out(*trace_path);
      write_trace_jsonl(f, synth.traces);
    } else {
      write_trace_jsonl(out, synth.traces);
    }
    if (truth_path) {
      auto f = open_out(*truth_path);
      write_truth_jsonl(f, synth.truth);
    }
    return kExitOk;
  });
}

int run_score(const std::filesystem::path& events_path, const std::filesystem::path& truth_path,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto events_in = open_in(events_path);
    auto truth_in = open_in(truth_path);
    std::vector<SyncEvent> events = read_events_jsonl(events_in, events_path.string());
    GroundTruth truth = read_truth_jsonl(truth_in, truth_path.string());
    Score s = score(events, truth);
    out << std::fixed << std::setprecision(6) << "precision " << s.precision << '\n'
        << "recall " << s.recall << '\n'
        << "true_positives " << s.true_positives << '\n'
        << "false_positives " << s.false_positives << '\n'
        << "false_negatives " << s.false_negatives << '\n';
    return kExitOk;
  });
}

int run_report(const RunConfig& config, const std::filesystem::path& events_path, std::istream& in,
               std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto psl_path = config.psl.value_or(data_dir() / "public_suffix_list.dat");
    PublicSuffixList psl = PublicSuffixList::load(psl_path);
    auto events_in = open_in(events_path);
    std::vector<SyncEvent> events = read_events_jsonl(events_in, events_path.string());
    std::vector<Trace> traces = load_inputs(config, in, err);
    out << render(aggregate(events, traces, psl), config.report_format);
    return kExitOk;
  });
}

}  // namespace syncscope
