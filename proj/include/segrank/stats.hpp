#pragma once

#include <span>
#include <vector>

namespace segrank {

// Linear-interpolation quantile (the "type 7" convention): with n sorted
// values, h = (n-1)*q, result = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1]
// - x[floor(h)]).
double quantile_sorted(std::span<const double> sorted, double q);

// Copies, sorts, then applies quantile_sorted.
double quantile(std::span<const double> values, double q);

// Sum over a sorted copy. The result depends only on the multiset of values,
// so means built on it are invariant under input permutation.
double sum_sorted(std::span<const double> values);
double mean_sorted(std::span<const double> values);

// Mid-rank assignment: tied values share the arithmetic mean of the integer
// ranks they span. ascending=true gives rank 1 to the smallest value.
// Computed per value by counting, so the output is independent of input
// order beyond the value multiset.
std::vector<double> midrank(std::span<const double> values, bool ascending);

}  // namespace segrank
