#include "syncscope/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "syncscope/entity.hpp"

namespace syncscope {

namespace {

using json = nlohmann::json;

class TraceBuilder {
 public:
  Trace& trace_for(const std::string& user_id) {
    auto [it, inserted] = index_.emplace(user_id, traces_.size());
    if (inserted) {
      traces_.emplace_back();
      traces_.back().user_id = user_id;
    }
    return traces_[it->second];
  }

  std::vector<Trace> take() { return std::move(traces_); }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<Trace> traces_;
};

std::string value_or_throw(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_string())
    throw std::invalid_argument(std::string("missing string field \"") + key + "\"");
  return it->get<std::string>();
}

std::int64_t int_or_throw(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_number_integer())
    throw std::invalid_argument(std::string("missing integer field \"") + key + "\"");
  return it->get<std::int64_t>();
}

// Lowercases names and fills the fields derived from headers.
void finish_transaction(HttpTransaction& tx, Diagnostics& diag) {
  for (auto& [name, value] : tx.request_headers)
    name = ascii_lower(name);
  for (auto& [name, value] : tx.response_headers)
    name = ascii_lower(name);
  if (auto referer = find_header(tx.request_headers, "referer")) {
    tx.referer = try_parse_url(*referer);
    if (!tx.referer)
      diag.warn("unparseable Referer \"" + std::string(*referer) + "\" in " + tx.url.raw);
  }
  for (const auto& [name, value] : tx.response_headers) {
    if (name != "set-cookie")
      continue;
    // Browser exports sometimes fold several Set-Cookie lines into one value.
    std::size_t start = 0;
    while (start <= value.size()) {
      std::size_t nl = value.find('\n', start);
      std::string line = value.substr(start, nl - start);
      if (!line.empty() && line.back() == '\r')
        line.pop_back();
      if (!line.empty())
        tx.set_cookie_lines.push_back(std::move(line));
      if (nl == std::string::npos)
        break;
      start = nl + 1;
    }
  }
  if (tx.response_status != 0 && (tx.response_status < 100 || tx.response_status > 599))
    throw std::invalid_argument("response status out of range: " +
                                std::to_string(tx.response_status));
}

HeaderList header_pairs(const json& array) {
  HeaderList headers;
  if (array.is_null())
    return headers;
  if (!array.is_array())
    throw std::invalid_argument("headers must be an array");
  for (const json& item : array) {
    if (item.is_array() && item.size() == 2 && item[0].is_string() && item[1].is_string())
      headers.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
    else if (item.is_object())
      headers.emplace_back(value_or_throw(item, "name"), value_or_throw(item, "value"));
    else
      throw std::invalid_argument("malformed header entry");
  }
  return headers;
}

bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xe ? 2 : (c >> 3) == 0x1e ? 3 : -1;
    if (extra < 0 || i + extra >= s.size() + (extra == 0))
      return false;
    for (int k = 1; k <= extra; ++k)
      if ((static_cast<unsigned char>(s[i + k]) & 0xc0) != 0x80)
        return false;
    i += extra + 1;
  }
  return true;
}

// ISO 8601 as written by browsers: 2024-01-02T03:04:05.678Z or with a
// +hh:mm offset.
std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
  int year, month, day, hour, minute;
  double second = 0;
  int consumed = 0;
  std::string text(s);
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%lf%n", &year, &month, &day, &hour, &minute,
                  &second, &consumed) < 6)
    return std::nullopt;
  std::string_view rest = std::string_view(text).substr(consumed);
  int offset_minutes = 0;
  if (!rest.empty() && rest != "Z") {
    int oh = 0, om = 0;
    char sign = rest[0];
    if ((sign != '+' && sign != '-') ||
        std::sscanf(std::string(rest.substr(1)).c_str(), "%d:%d", &oh, &om) < 1)
      return std::nullopt;
    offset_minutes = (sign == '+' ? 1 : -1) * (oh * 60 + om);
  }
  using namespace std::chrono;
  year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                     std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok())
    return std::nullopt;
  auto tp = sys_days{ymd} + hours{hour} + minutes{minute} - minutes{offset_minutes};
  return duration_cast<milliseconds>(tp.time_since_epoch()).count() +
         static_cast<std::int64_t>(second * 1000.0 + 0.5);
}

bool is_document_entry(const json& entry) {
  if (entry.value("_resourceType", "") == "document")
    return true;
  const json& response = entry.value("response", json::object());
  const json& content = response.value("content", json::object());
  return content.value("mimeType", "").rfind("text/html", 0) == 0;
}

bool is_non_network(std::string_view url) {
  for (std::string_view scheme : {"data:", "blob:", "about:", "chrome-extension:", "moz-extension:"})
    if (url.substr(0, scheme.size()) == scheme)
      return true;
  return false;
}

}  // namespace

IngestResult read_har(std::istream& in, const IngestOptions& options, std::string_view source) {
  IngestResult result;
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string(source), 0, std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("log") || !root["log"].is_object())
    throw ParseError(std::string(source), 0, "not a HAR document: missing log object");
  const json& log = root["log"];
  const json& entries = log.value("entries", json::array());
  if (!entries.is_array())
    throw ParseError(std::string(source), 0, "log.entries is not an array");

  // Page id -> landing URL.
  std::map<std::string, UrlParts> page_landing;
  const json& pages = log.value("pages", json::array());
  if (pages.is_array()) {
    for (const json& page : pages) {
      if (!page.is_object())
        continue;
      if (auto url = try_parse_url(page.value("title", "")))
        page_landing.emplace(page.value("id", ""), *url);
    }
  }
  std::map<std::string, UrlParts> page_first_document;
  std::optional<UrlParts> first_document;
  for (const json& entry : entries) {
    if (!entry.is_object() || !is_document_entry(entry))
      continue;
    const json& request = entry.value("request", json::object());
    auto url = try_parse_url(request.value("url", ""));
    if (!url)
      continue;
    if (!first_document)
      first_document = *url;
    page_first_document.emplace(entry.value("pageref", ""), *url);
  }

  struct Pending {
    std::int64_t started;
    std::size_t index;
    HttpTransaction tx;
  };
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& entry = entries[i];
    try {
      if (!entry.is_object())
        throw std::invalid_argument("entry is not an object");
      const json& request = entry.at("request");
      const json& response = entry.value("response", json::object());
      std::string raw_url = value_or_throw(request, "url");
      if (is_non_network(raw_url)) {
        ++result.ignored;
        continue;
      }
      HttpTransaction tx;
      tx.user_id = options.user_id;
      tx.url = parse_url(raw_url);
      tx.method = request.value("method", "GET");
      auto started = parse_iso8601_ms(value_or_throw(entry, "startedDateTime"));
      if (!started)
        throw std::invalid_argument("bad startedDateTime");
      tx.timestamp_ms = *started;
      tx.request_headers = header_pairs(request.value("headers", json::array()));
      tx.response_headers = header_pairs(response.value("headers", json::array()));
      tx.response_status = response.value("status", 0);
      if (auto post = request.find("postData"); post != request.end() && post->is_object()) {
        PostBody body;
        body.content_type = post->value("mimeType", "");
        if (post->contains("text")) {
          body.bytes = post->value("text", "");
        } else if (auto params = post->find("params"); params != post->end() && params->is_array()) {
          for (const json& p : *params) {
            if (!body.bytes.empty())
              body.bytes += "&";
            body.bytes += p.value("name", "") + "=" + p.value("value", "");
          }
        }
        tx.post_body = std::move(body);
      }
      std::string pageref = entry.value("pageref", "");
      if (auto it = page_landing.find(pageref); it != page_landing.end())
        tx.landing_page = it->second;
      else if (auto doc = page_first_document.find(pageref); doc != page_first_document.end())
        tx.landing_page = doc->second;
      else if (first_document)
        tx.landing_page = *first_document;
      else
        tx.landing_page = tx.url;
      finish_transaction(tx, result.diagnostics);
      pending.push_back({*started, i, std::move(tx)});
    } catch (const std::exception& e) {
      if (options.on_error == ErrorPolicy::Fail)
        throw ParseError(std::string(source), i, e.what());
      ++result.skipped;
      result.diagnostics.warn(std::string(source) + ": entry " + std::to_string(i) +
                              " skipped: " + e.what());
    }
  }

  std::stable_sort(pending.begin(), pending.end(),
                   [](const Pending& a, const Pending& b) { return a.started < b.started; });
  Trace trace;
  trace.user_id = options.user_id;
  for (auto& p : pending) {
    p.tx.seq_no = trace.transactions.size();
    trace.transactions.push_back(std::move(p.tx));
  }
  result.parsed = trace.transactions.size();
  result.traces.push_back(std::move(trace));
  return result;
}

IngestResult load_har(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open file");
  return read_har(in, options, path.string());
}

IngestResult read_trace_jsonl(std::istream& in, const IngestOptions& options,
                              std::string_view source) {
  IngestResult result;
  TraceBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      json record = json::parse(line);
      if (!record.is_object())
        throw std::invalid_argument("record is not an object");
      std::string type = record.value("type", "tx");
      std::string user = value_or_throw(record, "user");
      if (type == "js_cookie") {
        JsCookieSet js;
        js.timestamp_ms = int_or_throw(record, "ts");
        js.frame_url = value_or_throw(record, "frame");
        js.cookie = value_or_throw(record, "cookie");
        builder.trace_for(user).js_cookie_sets.push_back(std::move(js));
        ++result.parsed;
        continue;
      }
      if (type != "tx")
        throw std::invalid_argument("unknown record type \"" + type + "\"");

      HttpTransaction tx;
      tx.seq_no = line_no - 1;
      tx.user_id = user;
      tx.timestamp_ms = int_or_throw(record, "ts");
      tx.url = parse_url(value_or_throw(record, "url"));
      tx.landing_page = record.contains("landing") ? parse_url(value_or_throw(record, "landing"))
                                                   : tx.url;
      tx.method = record.value("method", "GET");
      tx.request_headers = header_pairs(record.value("headers", json::array()));
      tx.response_headers = header_pairs(record.value("resp_headers", json::array()));
      tx.response_status = record.value("status", 0);
      if (record.contains("post_body")) {
        PostBody body;
        body.content_type = record.value("post_type", "");
        std::string text = value_or_throw(record, "post_body");
        if (record.value("post_encoding", "utf-8") == "base64") {
          auto decoded = base64_decode(text);
          if (!decoded)
            throw std::invalid_argument("post_body is not valid base64");
          body.bytes = std::move(*decoded);
        } else {
          body.bytes = std::move(text);
        }
        tx.post_body = std::move(body);
      }
      finish_transaction(tx, result.diagnostics);
      Trace& trace = builder.trace_for(user);
      if (!trace.transactions.empty() && trace.transactions.back().seq_no >= tx.seq_no)
        throw std::invalid_argument("seq_no not increasing");
      trace.transactions.push_back(std::move(tx));
      ++result.parsed;
    } catch (const std::exception& e) {
      if (options.on_error == ErrorPolicy::Fail)
        throw ParseError(std::string(source), line_no, e.what());
      ++result.skipped;
      result.diagnostics.warn(std::string(source) + ":" + std::to_string(line_no) +
                              ": skipped: " + e.what());
    }
  }
  result.traces = builder.take();
  return result;
}

IngestResult load_trace_jsonl(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open file");
  return read_trace_jsonl(in, options, path.string());
}

void write_trace_jsonl(std::ostream& out, std::span<const Trace> traces) {
  using ojson = nlohmann::ordered_json;
  auto url_text = [](const UrlParts& url) { return url.raw.empty() ? serialize(url) : url.raw; };
  auto headers_json = [](const HeaderList& headers) {
    ojson array = ojson::array();
    for (const auto& [name, value] : headers)
      array.push_back(ojson::array({name, value}));
    return array;
  };
  for (const Trace& trace : traces) {
    for (const HttpTransaction& tx : trace.transactions) {
      ojson line;
      line["type"] = "tx";
      line["ts"] = tx.timestamp_ms;
      line["user"] = tx.user_id;
      line["landing"] = url_text(tx.landing_page);
      line["method"] = tx.method;
      line["url"] = url_text(tx.url);
      line["headers"] = headers_json(tx.request_headers);
      line["status"] = tx.response_status;
      line["resp_headers"] = headers_json(tx.response_headers);
      if (tx.post_body) {
        if (valid_utf8(tx.post_body->bytes)) {
          line["post_body"] = tx.post_body->bytes;
        } else {
          line["post_body"] = base64_encode(tx.post_body->bytes);
          line["post_encoding"] = "base64";
        }
        line["post_type"] = tx.post_body->content_type;
      }
      out << line.dump() << '\n';
    }
    for (const JsCookieSet& js : trace.js_cookie_sets) {
      ojson line;
      line["type"] = "js_cookie";
      line["ts"] = js.timestamp_ms;
      line["user"] = trace.user_id;
      line["frame"] = js.frame_url;
      line["cookie"] = js.cookie;
      out << line.dump() << '\n';
    }
  }
}

void assign_jsonl_sequence(std::vector<Trace>& traces) {
  std::uint64_t line = 0;
  for (Trace& trace : traces) {
    for (HttpTransaction& tx : trace.transactions)
      tx.seq_no = line++;
    line += trace.js_cookie_sets.size();
  }
}

std::vector<CookieRecord> http_cookie_records(const Trace& trace, bool include_request_echo,
                                              Diagnostics* diag) {
  std::vector<CookieRecord> records;
  for (const HttpTransaction& tx : trace.transactions) {
    if (include_request_echo) {
      for (const auto& [name, value] : tx.request_headers) {
        if (name != "cookie")
          continue;
        std::size_t skipped = 0;
        auto echoed = parse_cookie_header(value, tx.url.host, tx.timestamp_ms, trace.user_id, &skipped);
        if (skipped)
          warn(diag, std::to_string(skipped) + " malformed Cookie pair(s) in " + tx.url.raw);
        records.insert(records.end(), echoed.begin(), echoed.end());
      }
    }
    for (const std::string& line : tx.set_cookie_lines) {
      try {
        records.push_back(parse_set_cookie(line, tx.url.host, tx.timestamp_ms, trace.user_id));
      } catch (const MalformedCookie& e) {
        warn(diag, e.what());
      }
    }
  }
  return records;
}

std::vector<CookieRecord> ingest_js_cookies(const Trace& trace, const PublicSuffixList& psl,
                                            Diagnostics* diag) {
  std::vector<CookieRecord> records;
  static const OrgMap kNoOrgs;
  for (const JsCookieSet& js : trace.js_cookie_sets) {
    auto frame = try_parse_url(js.frame_url);
    if (!frame || frame->host.empty()) {
      warn(diag, "script cookie skipped, unparseable frame URL: " + js.frame_url);
      continue;
    }
    try {
      std::string owner = entity_or_host(frame->host, EntityMode::Etld1, psl, kNoOrgs).name;
      CookieRecord record = parse_set_cookie(js.cookie, owner, js.timestamp_ms, trace.user_id);
      // document.cookie cannot widen ownership past the embedding page.
      record.owner = owner;
      record.mechanism = SetMechanism::JavaScript;
      records.push_back(std::move(record));
    } catch (const MalformedCookie& e) {
      warn(diag, e.what());
    }
  }
  return records;
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                      static_cast<unsigned char>(bytes[i + 2]);
    out += {kAlphabet[v >> 18], kAlphabet[(v >> 12) & 63], kAlphabet[(v >> 6) & 63], kAlphabet[v & 63]};
  }
  if (i + 1 == bytes.size()) {
    std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
    out += {kAlphabet[v >> 18], kAlphabet[(v >> 12) & 63], '=', '='};
  } else if (i + 2 == bytes.size()) {
    std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                      (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out += {kAlphabet[v >> 18], kAlphabet[(v >> 12) & 63], kAlphabet[(v >> 6) & 63], '='};
  }
  return out;
}

std::optional<std::string> base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z')
      return c - 'A';
    if (c >= 'a' && c <= 'z')
      return c - 'a' + 26;
    if (c >= '0' && c <= '9')
      return c - '0' + 52;
    if (c == '+' || c == '-')
      return 62;
    if (c == '/' || c == '_')
      return 63;
    return -1;
  };
  std::size_t padding = 0;
  while (!text.empty() && text.back() == '=') {
    text.remove_suffix(1);
    ++padding;
  }
  if (padding > 2 || text.size() % 4 == 1)
    return std::nullopt;
  std::string out;
  std::uint32_t buffer = 0;
  int bits = 0;
  for (char c : text) {
    int v = value(c);
    if (v < 0)
      return std::nullopt;
    buffer = (buffer << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace syncscope
