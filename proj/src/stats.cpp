#include "segrank/stats.hpp"

#include <algorithm>
#include <cmath>

#include "segrank/error.hpp"

namespace segrank {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(Errc::empty_input, "quantile of empty list");
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  double h = static_cast<double>(n - 1) * q;
  double lo = std::floor(h);
  std::size_t i = static_cast<std::size_t>(lo);
  if (i >= n - 1) return sorted[n - 1];
  double frac = h - lo;
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double quantile(std::span<const double> values, double q) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, q);
}

double sum_sorted(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double mean_sorted(std::span<const double> values) {
  if (values.empty()) fail(Errc::empty_input, "mean of empty list");
  return sum_sorted(values) / static_cast<double>(values.size());
}

std::vector<double> midrank(std::span<const double> values, bool ascending) {
  const std::size_t n = values.size();
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t better = 0;
    std::size_t tied = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (values[j] == values[i]) {
        ++tied;
      } else if (ascending ? values[j] < values[i] : values[j] > values[i]) {
        ++better;
      }
    }
    ranks[i] = static_cast<double>(better) + static_cast<double>(tied + 1) / 2.0;
  }
  return ranks;
}

}  // namespace segrank
