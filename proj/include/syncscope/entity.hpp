#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "syncscope/error.hpp"
#include "syncscope/public_suffix.hpp"

namespace syncscope {

enum class EntityMode { Domain, Etld1, Organization };

std::string_view to_string(EntityMode mode);
std::optional<EntityMode> entity_mode_from_string(std::string_view s);

struct Entity {
  EntityMode mode = EntityMode::Domain;
  std::string name;

  friend auto operator<=>(const Entity&, const Entity&) = default;
};

// Registrable domain -> parent organization. Organization names are kept as
// written in the source table.
class OrgMap {
 public:
  void set(std::string_view domain, std::string_view organization);
  const std::string* find(std::string_view domain) const;
  bool is_organization(std::string_view name) const;
  std::size_t size() const { return by_domain_.size(); }
  bool empty() const { return by_domain_.empty(); }

 private:
  std::unordered_map<std::string, std::string> by_domain_;
  std::unordered_multiset<std::string> organizations_;
};

// TSV `registrable-domain<TAB>organization`. Duplicate domains: last wins,
// one warning each. Throws ParseError on lines without a tab.
OrgMap load_org_map(std::istream& in, Diagnostics* diag = nullptr,
                    std::string_view source = "<orgs>");
OrgMap load_org_map(const std::filesystem::path& path, Diagnostics* diag = nullptr);

// Domain mode: the host. Etld1: its registrable domain. Organization: the
// mapped organization of the registrable domain, or the registrable domain
// itself when unmapped. Throws UnresolvableSuffix in Etld1/Organization
// mode for IP literals and bare public suffixes.
Entity entity_of(std::string_view domain, EntityMode mode, const PublicSuffixList& psl,
                 const OrgMap& orgs);

// entity_of with the unresolvable case mapped to the full host.
Entity entity_or_host(std::string_view domain, EntityMode mode, const PublicSuffixList& psl,
                      const OrgMap& orgs);

}  // namespace syncscope
