#pragma once

#include <filesystem>

#include "syncscope/entity.hpp"
#include "syncscope/profile.hpp"
#include "syncscope/public_suffix.hpp"
#include "syncscope/url.hpp"

namespace syncscope {

enum class PartyRelation { FirstParty, ThirdParty };

struct PartyLabel {
  PartyRelation relation = PartyRelation::ThirdParty;
  PartyStrategy basis = PartyStrategy::Etld1;
  // A host had no registrable domain and was compared as a whole.
  bool host_fallback = false;
  Entity landing_entity;
  Entity request_entity;
};

inline PublicSuffixList load_public_suffix_rules(const std::filesystem::path& path) {
  return PublicSuffixList::load(path);
}

// StringMatch compares full hosts, Etld1 registrable domains, Organization
// the mapped parent organizations. Ports and schemes are ignored.
PartyLabel label_party(const UrlParts& landing, const UrlParts& request, PartyStrategy strategy,
                       const PublicSuffixList& psl, const OrgMap& orgs);

}  // namespace syncscope
