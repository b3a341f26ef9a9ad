#pragma once

#include "pfdet/matrix.hpp"

#include <vector>

namespace pfdet {

// Maximum-weight perfect assignment on a square weight matrix, row i matched
// to column pi[i]. Solved exactly in O(K^3) per solve; among equally good
// assignments the lexicographically smallest permutation is returned.
std::vector<int> match_rows_to_cols(const Matrix& weights);

double assignment_value(const Matrix& weights, const std::vector<int>& pi);

namespace detail {
// Classic Hungarian algorithm with potentials, minimizing total cost.
std::vector<int> hungarian_min(const Matrix& cost);
} // namespace detail

} // namespace pfdet
