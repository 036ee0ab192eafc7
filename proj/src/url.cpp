#include "syncscope/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "syncscope/error.hpp"

namespace syncscope {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

std::string percent_encode(std::string_view s, std::string_view reserved) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c <= 0x20 || c >= 0x7f || c == '%' ||
        reserved.find(static_cast<char>(c)) != std::string_view::npos) {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0])))
    return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' ||
           c == '-' || c == '.';
  });
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segments;
  if (path.empty() || path == "/")
    return segments;
  if (path.front() == '/')
    path.remove_prefix(1);
  std::size_t start = 0;
  while (true) {
    std::size_t slash = path.find('/', start);
    segments.push_back(percent_decode(path.substr(start, slash - start)));
    if (slash == std::string_view::npos)
      break;
    start = slash + 1;
  }
  return segments;
}

}  // namespace

bool UrlParts::operator==(const UrlParts& other) const {
  return scheme == other.scheme && host == other.host && port == other.port &&
         path_segments == other.path_segments &&
         query_pairs == other.query_pairs && fragment == other.fragment;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

QueryPairs parse_query(std::string_view query) {
  QueryPairs pairs;
  std::size_t start = 0;
  while (start <= query.size()) {
    std::size_t amp = query.find('&', start);
    std::string_view piece = query.substr(start, amp - start);
    if (!piece.empty()) {
      std::size_t eq = piece.find('=');
      if (eq == std::string_view::npos)
        pairs.emplace_back(percent_decode(piece), std::string());
      else
        pairs.emplace_back(percent_decode(piece.substr(0, eq)),
                           percent_decode(piece.substr(eq + 1)));
    }
    if (amp == std::string_view::npos)
      break;
    start = amp + 1;
  }
  return pairs;
}

bool is_ip_literal(std::string_view host) {
  if (host.empty())
    return false;
  if (host.front() == '[')
    return true;
  int dots = 0;
  std::size_t digits = 0;
  for (char c : host) {
    if (c == '.') {
      if (digits == 0)
        return false;
      ++dots;
      digits = 0;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ++digits;
    } else {
      return false;
    }
  }
  return dots == 3 && digits > 0;
}

UrlParts parse_url(std::string_view raw) {
  UrlParts parts;
  parts.raw = std::string(raw);

  std::size_t colon = raw.find(':');
  if (colon == std::string_view::npos || !valid_scheme(raw.substr(0, colon)))
    throw MalformedUrl("no scheme in URL: " + std::string(raw));
  parts.scheme = ascii_lower(raw.substr(0, colon));
  std::string_view rest = raw.substr(colon + 1);
  if (rest.substr(0, 2) != "//")
    throw MalformedUrl("no authority in URL: " + std::string(raw));
  rest.remove_prefix(2);

  std::size_t auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  rest = auth_end == std::string_view::npos ? std::string_view()
                                            : rest.substr(auth_end);

  if (std::size_t at = authority.rfind('@'); at != std::string_view::npos)
    authority.remove_prefix(at + 1);
  std::string_view host = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    std::size_t close = authority.find(']');
    if (close == std::string_view::npos)
      throw MalformedUrl("unterminated IPv6 literal: " + std::string(raw));
    host = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':')
        throw MalformedUrl("bad authority: " + std::string(raw));
      port = after.substr(1);
    }
  } else if (std::size_t pc = authority.rfind(':');
             pc != std::string_view::npos) {
    host = authority.substr(0, pc);
    port = authority.substr(pc + 1);
  }
  parts.host = ascii_lower(host);
  if (!port.empty()) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value < 0 ||
        value > 65535)
      throw MalformedUrl("bad port in URL: " + std::string(raw));
    parts.port = value;
  }
  if (parts.host.empty() && (parts.scheme == "http" || parts.scheme == "https"))
    throw MalformedUrl("empty host in URL: " + std::string(raw));

  std::size_t hash = rest.find('#');
  if (hash != std::string_view::npos) {
    parts.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  std::size_t question = rest.find('?');
  parts.path_segments = split_path(rest.substr(0, question));
  if (question != std::string_view::npos)
    parts.query_pairs = parse_query(rest.substr(question + 1));
  return parts;
}

std::optional<UrlParts> try_parse_url(std::string_view raw) {
  try {
    return parse_url(raw);
  } catch (const MalformedUrl&) {
    return std::nullopt;
  }
}

UrlParts resolve_url(const UrlParts& base, std::string_view reference) {
  if (auto absolute = try_parse_url(reference))
    return *absolute;
  std::string origin = base.scheme + "://" + base.host;
  if (base.port)
    origin += ":" + std::to_string(*base.port);
  if (reference.substr(0, 2) == "//")
    return parse_url(base.scheme + ":" + std::string(reference));
  if (!reference.empty() && reference.front() == '/')
    return parse_url(origin + std::string(reference));

  // Relative path: replace the last segment of the base path.
  std::string dir = "/";
  for (std::size_t i = 0; i + 1 < base.path_segments.size(); ++i)
    dir += percent_encode(base.path_segments[i], "/?#") + "/";
  if (!reference.empty() && (reference.front() == '?' || reference.front() == '#')) {
    std::string path = "/";
    for (std::size_t i = 0; i < base.path_segments.size(); ++i)
      path += (i ? "/" : "") + percent_encode(base.path_segments[i], "/?#");
    return parse_url(origin + path + std::string(reference));
  }
  return parse_url(origin + dir + std::string(reference));
}

std::string serialize(const UrlParts& parts) {
  std::string out = parts.scheme + "://" + parts.host;
  if (parts.port)
    out += ":" + std::to_string(*parts.port);
  out += "/";
  for (std::size_t i = 0; i < parts.path_segments.size(); ++i) {
    if (i)
      out += "/";
    out += percent_encode(parts.path_segments[i], "/?#");
  }
  if (!parts.query_pairs.empty()) {
    out += "?";
    for (std::size_t i = 0; i < parts.query_pairs.size(); ++i) {
      if (i)
        out += "&";
      out += percent_encode(parts.query_pairs[i].first, "&=#");
      out += "=";
      out += percent_encode(parts.query_pairs[i].second, "&=#");
    }
  }
  if (parts.fragment)
    out += "#" + *parts.fragment;
  return out;
}

}  // namespace syncscope
