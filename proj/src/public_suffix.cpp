#include "syncscope/public_suffix.hpp"

#include <fstream>
#include <istream>
#include <vector>

#include "syncscope/error.hpp"
#include "syncscope/url.hpp"

namespace syncscope {

namespace {

std::vector<std::string_view> split_labels(std::string_view name) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = name.find('.', start);
    labels.push_back(name.substr(start, dot - start));
    if (dot == std::string_view::npos)
      break;
    start = dot + 1;
  }
  return labels;
}

std::string join_from(const std::vector<std::string_view>& labels, std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < labels.size(); ++i) {
    if (i != first)
      out.push_back('.');
    out.append(labels[i]);
  }
  return out;
}

bool decode_utf8(std::string_view s, std::u32string& out) {
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int extra = c < 0x80 ? 0 : (c >> 5) == 0x6 ? 1 : (c >> 4) == 0xe ? 2 : (c >> 3) == 0x1e ? 3 : -1;
    if (extra < 0)
      return false;
    char32_t cp = extra == 0 ? c : (c & (0x3f >> extra));
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size())
        return false;
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80)
        return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return true;
}

char encode_digit(std::uint32_t d) {
  return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
}

std::uint32_t adapt(std::uint32_t delta, std::uint32_t points, bool first) {
  constexpr std::uint32_t kBase = 36, kTmin = 1, kTmax = 26, kSkew = 38, kDamp = 700;
  delta = first ? delta / kDamp : delta / 2;
  delta += delta / points;
  std::uint32_t k = 0;
  while (delta > ((kBase - kTmin) * kTmax) / 2) {
    delta /= kBase - kTmin;
    k += kBase;
  }
  return k + (kBase - kTmin + 1) * delta / (delta + kSkew);
}

}  // namespace

std::optional<std::string> punycode_label(std::string_view utf8_label) {
  std::u32string input;
  if (!decode_utf8(utf8_label, input))
    return std::nullopt;
  bool ascii = true;
  for (char32_t c : input)
    ascii = ascii && c < 0x80;
  if (ascii)
    return std::string(utf8_label);

  constexpr std::uint32_t kBase = 36, kTmin = 1, kTmax = 26;
  std::string output;
  for (char32_t c : input)
    if (c < 0x80)
      output.push_back(static_cast<char>(c));
  std::uint32_t basic = static_cast<std::uint32_t>(output.size());
  std::uint32_t handled = basic;
  if (basic > 0)
    output.push_back('-');

  std::uint32_t n = 0x80, delta = 0, bias = 72;
  while (handled < input.size()) {
    std::uint32_t m = 0xffffffff;
    for (char32_t c : input)
      if (c >= n && c < m)
        m = c;
    delta += (m - n) * (handled + 1);
    n = m;
    for (char32_t c : input) {
      if (c < n)
        ++delta;
      if (c == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = kBase;; k += kBase) {
          std::uint32_t t = k <= bias ? kTmin : k >= bias + kTmax ? kTmax : k - bias;
          if (q < t)
            break;
          output.push_back(encode_digit(t + (q - t) % (kBase - t)));
          q = (q - t) / (kBase - t);
        }
        output.push_back(encode_digit(q));
        bias = adapt(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return "xn--" + output;
}

void PublicSuffixList::add_rule(std::string_view rule) {
  auto& target = rule.front() == '!' ? exception_
                 : rule.substr(0, 2) == "*." ? wildcard_
                                             : exact_;
  if (rule.front() == '!')
    rule.remove_prefix(1);
  else if (rule.substr(0, 2) == "*.")
    rule.remove_prefix(2);
  std::string lowered = ascii_lower(rule);
  target.insert(lowered);

  // Punycode variant so ACE-encoded hosts match Unicode rules.
  std::string ace;
  bool changed = false;
  for (std::string_view label : split_labels(lowered)) {
    auto encoded = punycode_label(label);
    if (!encoded)
      return;
    changed = changed || *encoded != label;
    if (!ace.empty())
      ace.push_back('.');
    ace += *encoded;
  }
  if (changed)
    target.insert(ace);
}

PublicSuffixList PublicSuffixList::parse(std::istream& in, std::string_view source) {
  PublicSuffixList list;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line.compare(begin, 2, "//") == 0)
      continue;
    std::size_t end = line.find_first_of(" \t\r", begin);
    std::string_view rule = std::string_view(line).substr(begin, end - begin);

    std::string_view body = rule;
    if (body.front() == '!')
      body.remove_prefix(1);
    if (body.empty())
      throw ParseError(std::string(source), line_no, "empty rule");
    bool wildcard = false;
    std::vector<std::string_view> labels = split_labels(body);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i].empty())
        throw ParseError(std::string(source), line_no, "empty label in rule");
      if (labels[i].find('*') != std::string_view::npos) {
        if (labels[i] != "*" || i != 0)
          throw ParseError(std::string(source), line_no, "wildcard must be the leftmost label");
        wildcard = true;
      }
    }
    if (wildcard && rule.front() == '!')
      throw ParseError(std::string(source), line_no, "exception rule with wildcard");
    if (wildcard && labels.size() < 2)
      throw ParseError(std::string(source), line_no, "bare wildcard rule");
    list.add_rule(rule);
  }
  return list;
}

PublicSuffixList PublicSuffixList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open public suffix list");
  return parse(in, path.string());
}

std::size_t PublicSuffixList::suffix_label_count(
    const std::vector<std::string_view>& labels) const {
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i)
    if (exception_.count(join_from(labels, i)))
      return n - i - 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::string candidate = join_from(labels, i);
    if (exact_.count(candidate))
      return n - i;
    // "*.rest" matches when labels[i] is the wildcard label.
    if (i + 1 < n && wildcard_.count(join_from(labels, i + 1)))
      return n - i;
  }
  return 1;
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
  std::string lowered = ascii_lower(host);
  std::vector<std::string_view> labels = split_labels(lowered);
  std::size_t count = suffix_label_count(labels);
  return join_from(labels, labels.size() - std::min(count, labels.size()));
}

std::optional<std::string> PublicSuffixList::registrable_domain(std::string_view host) const {
  if (host.empty() || host.front() == '.' || is_ip_literal(host))
    return std::nullopt;
  std::string lowered = ascii_lower(host);
  std::vector<std::string_view> labels = split_labels(lowered);
  for (std::string_view label : labels)
    if (label.empty())
      return std::nullopt;
  std::size_t count = suffix_label_count(labels);
  if (labels.size() <= count)
    return std::nullopt;
  return join_from(labels, labels.size() - count - 1);
}

}  // namespace syncscope
