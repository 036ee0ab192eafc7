#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "syncscope/similarity.hpp"

using namespace syncscope;

TEST_CASE("Ratcliff/Obershelp known values") {
  CHECK(ratcliff_obershelp("abcd", "abce") == 0.75);
  CHECK(ratcliff_obershelp("", "") == 1.0);
  CHECK(ratcliff_obershelp("abc", "") == 0.0);
  CHECK(ratcliff_obershelp_matches("WIKIMEDIA", "WIKIMANIA") == 7);
}

TEST_CASE("Ratcliff/Obershelp is greedy, not a longest common subsequence") {
  CHECK(ratcliff_obershelp_matches("ba", "abca") == 1);
  CHECK(oracle::lcs_length("ba", "abca") == 2);
}

TEST_CASE("Ratcliff/Obershelp is symmetric and bounded by the LCS") {
  auto strings = oracle::all_strings("ab", 5);
  for (const auto& a : strings)
    for (const auto& b : strings) {
      CHECK(ratcliff_obershelp_matches(a, b) == ratcliff_obershelp_matches(b, a));
      CHECK(ratcliff_obershelp_matches(a, b) <= oracle::lcs_length(a, b));
    }
}

TEST_CASE("agrees with difflib on the golden file") {
  std::ifstream in(SYNCSCOPE_TEST_DATA_DIR "/ratcliff_difflib.tsv");
  REQUIRE(in);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    auto t1 = line.find('\t');
    auto t2 = line.find('\t', t1 + 1);
    std::string a = line.substr(0, t1);
    std::string b = line.substr(t1 + 1, t2 - t1 - 1);
    std::size_t want = std::stoul(line.substr(t2 + 1));
    INFO(a << " / " << b);
    CHECK(ratcliff_obershelp_matches(a, b) == want);
    ++rows;
  }
  CHECK(rows == 3000);
}
