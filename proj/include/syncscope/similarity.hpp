#pragma once

#include <cstddef>
#include <string_view>

namespace syncscope {

// Ratcliff/Obershelp gestalt matching. The arguments are first put in
// lexicographic order; the longest common substring is then taken (leftmost
// in the first string, then leftmost in the second) and the procedure
// recurses on the unmatched pieces to its left and right. Returns the total
// number of matched characters.
std::size_t ratcliff_obershelp_matches(std::string_view a, std::string_view b);

// 2*M / (|a| + |b|); 1.0 for two empty strings.
double ratcliff_obershelp(std::string_view a, std::string_view b);

}  // namespace syncscope
