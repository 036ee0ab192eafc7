#include "syncscope/party.hpp"

namespace syncscope {

PartyLabel label_party(const UrlParts& landing, const UrlParts& request, PartyStrategy strategy,
                       const PublicSuffixList& psl, const OrgMap& orgs) {
  PartyLabel label;
  label.basis = strategy;
  EntityMode mode = entity_mode_for(strategy);
  auto resolve = [&](const std::string& host) {
    try {
      return entity_of(host, mode, psl, orgs);
    } catch (const UnresolvableSuffix&) {
      label.host_fallback = true;
      return Entity{mode, host};
    }
  };
  label.landing_entity = resolve(landing.host);
  label.request_entity = resolve(request.host);
  label.relation = label.landing_entity == label.request_entity ? PartyRelation::FirstParty
                                                                : PartyRelation::ThirdParty;
  return label;
}

}  // namespace syncscope
