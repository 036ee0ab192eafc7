#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace syncscope {

// Rule set in the published public suffix list format: `//` comments,
// `*.` wildcard rules and `!` exception rules. Lookups follow the list's
// algorithm: exception rules win, otherwise the longest matching rule, and
// the implicit `*` rule when nothing matches. Unicode rules are indexed in
// both UTF-8 and punycode form.
class PublicSuffixList {
 public:
  PublicSuffixList() = default;

  // Throws ParseError with a 1-based line number.
  static PublicSuffixList parse(std::istream& in, std::string_view source = "<psl>");
  static PublicSuffixList load(const std::filesystem::path& path);

  void add_rule(std::string_view rule);

  // Public suffix of a lowercase host; the last label when no rule matches.
  std::string public_suffix(std::string_view host) const;

  // eTLD+1. Empty when the host is an IP literal, is itself a public
  // suffix, or is not a well-formed dotted name.
  std::optional<std::string> registrable_domain(std::string_view host) const;

  std::size_t rule_count() const {
    return exact_.size() + wildcard_.size() + exception_.size();
  }

 private:
  std::size_t suffix_label_count(const std::vector<std::string_view>& labels) const;

  std::unordered_set<std::string> exact_;
  std::unordered_set<std::string> wildcard_;   // stored without the "*."
  std::unordered_set<std::string> exception_;  // stored without the "!"
};

// RFC 3492 encoding of a UTF-8 label, with the "xn--" prefix. ASCII-only
// labels are returned unchanged. Empty on invalid UTF-8.
std::optional<std::string> punycode_label(std::string_view utf8_label);

}  // namespace syncscope
