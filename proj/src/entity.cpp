#include "syncscope/entity.hpp"

#include <fstream>
#include <istream>

#include "syncscope/url.hpp"

namespace syncscope {

std::string_view to_string(EntityMode mode) {
  switch (mode) {
    case EntityMode::Domain:
      return "domain";
    case EntityMode::Etld1:
      return "etld1";
    case EntityMode::Organization:
      return "org";
  }
  return "domain";
}

std::optional<EntityMode> entity_mode_from_string(std::string_view s) {
  if (s == "domain" || s == "string")
    return EntityMode::Domain;
  if (s == "etld1")
    return EntityMode::Etld1;
  if (s == "org" || s == "organization")
    return EntityMode::Organization;
  return std::nullopt;
}

void OrgMap::set(std::string_view domain, std::string_view organization) {
  std::string key = ascii_lower(domain);
  if (auto it = by_domain_.find(key); it != by_domain_.end()) {
    organizations_.erase(organizations_.find(it->second));
    it->second = std::string(organization);
  } else {
    by_domain_.emplace(key, std::string(organization));
  }
  organizations_.insert(std::string(organization));
}

const std::string* OrgMap::find(std::string_view domain) const {
  auto it = by_domain_.find(std::string(domain));
  return it == by_domain_.end() ? nullptr : &it->second;
}

bool OrgMap::is_organization(std::string_view name) const {
  return organizations_.count(std::string(name)) > 0;
}

OrgMap load_org_map(std::istream& in, Diagnostics* diag, std::string_view source) {
  OrgMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line.front() == '#')
      continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw ParseError(std::string(source), line_no, "expected domain<TAB>organization");
    std::string_view domain = std::string_view(line).substr(0, tab);
    if (map.find(ascii_lower(domain)))
      warn(diag, std::string(source) + ":" + std::to_string(line_no) +
                     ": duplicate domain " + std::string(domain) + ", last entry wins");
    map.set(domain, std::string_view(line).substr(tab + 1));
  }
  return map;
}

OrgMap load_org_map(const std::filesystem::path& path, Diagnostics* diag) {
  std::ifstream in(path);
  if (!in)
    throw ParseError(path.string(), 0, "cannot open org map");
  return load_org_map(in, diag, path.string());
}

Entity entity_of(std::string_view domain, EntityMode mode, const PublicSuffixList& psl,
                 const OrgMap& orgs) {
  if (mode == EntityMode::Domain)
    return {mode, ascii_lower(domain)};
  if (mode == EntityMode::Organization && orgs.is_organization(domain))
    return {mode, std::string(domain)};
  auto registrable = psl.registrable_domain(domain);
  if (!registrable)
    throw UnresolvableSuffix("no registrable domain for host " + std::string(domain));
  if (mode == EntityMode::Organization) {
    if (const std::string* org = orgs.find(*registrable))
      return {mode, *org};
  }
  return {mode, std::move(*registrable)};
}

Entity entity_or_host(std::string_view domain, EntityMode mode, const PublicSuffixList& psl,
                      const OrgMap& orgs) {
  try {
    return entity_of(domain, mode, psl, orgs);
  } catch (const UnresolvableSuffix&) {
    return {mode, ascii_lower(domain)};
  }
}

}  // namespace syncscope
