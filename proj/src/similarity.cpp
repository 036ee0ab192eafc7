#include "syncscope/similarity.hpp"

#include <utility>
#include <vector>

namespace syncscope {

namespace {

struct Match {
  std::size_t a_pos = 0;
  std::size_t b_pos = 0;
  std::size_t length = 0;
};

// Longest common substring of a[a_lo,a_hi) and b[b_lo,b_hi). Scanning end
// positions in increasing order and only replacing on a strictly longer run
// yields the smallest start in `a`, then the smallest start in `b`.
Match longest_match(std::string_view a, std::size_t a_lo, std::size_t a_hi, std::string_view b,
                    std::size_t b_lo, std::size_t b_hi, std::vector<std::size_t>& prev,
                    std::vector<std::size_t>& cur) {
  Match best;
  const std::size_t width = b_hi - b_lo;
  prev.assign(width + 1, 0);
  cur.assign(width + 1, 0);
  for (std::size_t i = a_lo; i < a_hi; ++i) {
    for (std::size_t j = b_lo; j < b_hi; ++j) {
      std::size_t k = j - b_lo + 1;
      cur[k] = a[i] == b[j] ? prev[k - 1] + 1 : 0;
      if (cur[k] > best.length)
        best = {i + 1 - cur[k], j + 1 - cur[k], cur[k]};
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

std::size_t ratcliff_obershelp_matches(std::string_view a, std::string_view b) {
  if (b < a)
    std::swap(a, b);
  struct Range {
    std::size_t a_lo, a_hi, b_lo, b_hi;
  };
  std::vector<Range> pending = {{0, a.size(), 0, b.size()}};
  std::vector<std::size_t> prev, cur;
  std::size_t matched = 0;
  while (!pending.empty()) {
    Range r = pending.back();
    pending.pop_back();
    if (r.a_lo >= r.a_hi || r.b_lo >= r.b_hi)
      continue;
    Match m = longest_match(a, r.a_lo, r.a_hi, b, r.b_lo, r.b_hi, prev, cur);
    if (m.length == 0)
      continue;
    matched += m.length;
    pending.push_back({r.a_lo, m.a_pos, r.b_lo, m.b_pos});
    pending.push_back({m.a_pos + m.length, r.a_hi, m.b_pos + m.length, r.b_hi});
  }
  return matched;
}

double ratcliff_obershelp(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty())
    return 1.0;
  return 2.0 * static_cast<double>(ratcliff_obershelp_matches(a, b)) /
         static_cast<double>(a.size() + b.size());
}

}  // namespace syncscope
