#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "syncscope/cookie.hpp"
#include "syncscope/error.hpp"
#include "syncscope/model.hpp"
#include "syncscope/public_suffix.hpp"

namespace syncscope {

enum class ErrorPolicy { Fail, Skip };

struct IngestOptions {
  ErrorPolicy on_error = ErrorPolicy::Fail;
  // User token for formats that do not carry one (HAR).
  std::string user_id = "user";
};

struct IngestResult {
  std::vector<Trace> traces;  // one per user, in order of first appearance
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  // Non-network entries (data:, blob:, ...) that carry no HTTP traffic.
  std::size_t ignored = 0;
  Diagnostics diagnostics;
};

// HAR 1.2. Entries are ordered by startedDateTime. Under ErrorPolicy::Fail a
// malformed entry throws ParseError carrying its 0-based entry index.
IngestResult read_har(std::istream& in, const IngestOptions& options = {},
                      std::string_view source = "<har>");
IngestResult load_har(const std::filesystem::path& path, const IngestOptions& options = {});

// Line-delimited trace format; seq_no is the 0-based line number. ParseError
// carries the 1-based line number.
IngestResult read_trace_jsonl(std::istream& in, const IngestOptions& options = {},
                              std::string_view source = "<jsonl>");
IngestResult load_trace_jsonl(const std::filesystem::path& path, const IngestOptions& options = {});

// Writes each trace's transactions, then its script cookie sets, trace by
// trace.
void write_trace_jsonl(std::ostream& out, std::span<const Trace> traces);

// Renumbers seq_no to the line index write_trace_jsonl will give each
// transaction, so that writing and re-reading reproduces the traces.
void assign_jsonl_sequence(std::vector<Trace>& traces);

// Set-Cookie records of every response, plus Cookie-header echoes when
// `include_request_echo`.
std::vector<CookieRecord> http_cookie_records(const Trace& trace, bool include_request_echo,
                                              Diagnostics* diag = nullptr);

// Script-set cookies, owned by the eTLD+1 of the frame that set them.
std::vector<CookieRecord> ingest_js_cookies(const Trace& trace, const PublicSuffixList& psl,
                                            Diagnostics* diag = nullptr);

std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

}  // namespace syncscope
