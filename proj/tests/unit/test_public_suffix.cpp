#include <doctest.h>

#include <sstream>

#include "syncscope/entity.hpp"
#include "syncscope/error.hpp"
#include "syncscope/party.hpp"
#include "syncscope/public_suffix.hpp"

using namespace syncscope;

namespace {

PublicSuffixList small_psl() {
  std::istringstream in(
      "// comment\ncom\nuk\nco.uk\n*.ck\n!www.ck\n// ===BEGIN PRIVATE DOMAINS===\nblogspot.com\n");
  return PublicSuffixList::parse(in);
}

const PublicSuffixList& real_psl() {
  static const PublicSuffixList psl = PublicSuffixList::load(SYNCSCOPE_REPO_DATA_DIR "/public_suffix_list.dat");
  return psl;
}

}  // namespace

TEST_CASE("registrable_domain applies normal, wildcard and exception rules") {
  PublicSuffixList psl = small_psl();
  CHECK(psl.registrable_domain("a.b.example.co.uk") == "example.co.uk");
  CHECK(psl.registrable_domain("co.uk") == std::nullopt);
  CHECK(psl.registrable_domain("x.y.ck") == "x.y.ck");
  CHECK(psl.registrable_domain("y.ck") == std::nullopt);
  CHECK(psl.registrable_domain("www.ck") == "www.ck");
  CHECK(psl.registrable_domain("foo.blogspot.com") == "foo.blogspot.com");
  CHECK(psl.registrable_domain("Sync.Example.COM") == "example.com");
  // Unlisted TLDs fall back to the implicit "*" rule.
  CHECK(psl.registrable_domain("a.b.unlisted") == "b.unlisted");
  CHECK(psl.public_suffix("a.example.co.uk") == "co.uk");
}

TEST_CASE("registrable_domain on the shipped list") {
  const auto& psl = real_psl();
  CHECK(psl.rule_count() > 5000);
  CHECK(psl.registrable_domain("cdn.tracker.example.co.jp") == "example.co.jp");
  CHECK(psl.registrable_domain("a.github.io") == "a.github.io");
  CHECK(psl.registrable_domain("192.0.2.1") == std::nullopt);
  CHECK(psl.registrable_domain("") == std::nullopt);
}

TEST_CASE("entity_of by mode") {
  const auto& psl = real_psl();
  OrgMap orgs;
  orgs.set("doubleclick.net", "Google");
  orgs.set("google.com", "Google");
  CHECK(entity_of("ad.doubleclick.net", EntityMode::Domain, psl, orgs).name == "ad.doubleclick.net");
  CHECK(entity_of("ad.doubleclick.net", EntityMode::Etld1, psl, orgs).name == "doubleclick.net");
  CHECK(entity_of("ad.doubleclick.net", EntityMode::Organization, psl, orgs).name == "Google");
  CHECK(entity_of("x.unmapped.org", EntityMode::Organization, psl, orgs).name == "unmapped.org");
  CHECK_THROWS_AS(entity_of("192.0.2.1", EntityMode::Etld1, psl, orgs), UnresolvableSuffix);
  CHECK_THROWS_AS(entity_of("co.uk", EntityMode::Etld1, psl, orgs), UnresolvableSuffix);
  CHECK(entity_or_host("192.0.2.1", EntityMode::Etld1, psl, orgs).name == "192.0.2.1");
}

TEST_CASE("load_org_map parses TSV and rejects lines without a tab") {
  std::istringstream good("# comment\ndoubleclick.net\tGoogle\nfacebook.com\tMeta\nfacebook.com\tMeta Platforms\n");
  Diagnostics diag;
  OrgMap orgs = load_org_map(good, &diag);
  CHECK(orgs.size() == 2);
  REQUIRE(orgs.find("facebook.com"));
  CHECK(*orgs.find("facebook.com") == "Meta Platforms");
  CHECK(diag.warnings.size() == 1);
  std::istringstream bad("doubleclick.net Google\n");
  CHECK_THROWS_AS(load_org_map(bad), ParseError);
}

TEST_CASE("label_party strategies") {
  const auto& psl = real_psl();
  OrgMap orgs;
  orgs.set("youtube.com", "Google");
  orgs.set("google.com", "Google");
  UrlParts landing = parse_url("https://www.youtube.com/watch");
  UrlParts same_site = parse_url("https://i.youtube.com:8443/x");
  UrlParts sibling = parse_url("https://accounts.google.com/");

  CHECK(label_party(landing, same_site, PartyStrategy::StringMatch, psl, orgs).relation == PartyRelation::ThirdParty);
  CHECK(label_party(landing, parse_url("http://www.youtube.com/"), PartyStrategy::StringMatch, psl, orgs).relation ==
        PartyRelation::FirstParty);
  CHECK(label_party(landing, same_site, PartyStrategy::Etld1, psl, orgs).relation == PartyRelation::FirstParty);
  CHECK(label_party(landing, sibling, PartyStrategy::Etld1, psl, orgs).relation == PartyRelation::ThirdParty);
  PartyLabel org = label_party(landing, sibling, PartyStrategy::Organization, psl, orgs);
  CHECK(org.relation == PartyRelation::FirstParty);
  CHECK(org.landing_entity.name == "Google");

  PartyLabel ip = label_party(parse_url("http://192.0.2.1/"), parse_url("http://192.0.2.1/x"), PartyStrategy::Etld1,
                              psl, orgs);
  CHECK(ip.host_fallback);
  CHECK(ip.relation == PartyRelation::FirstParty);
}
