#include "segrank/stability.hpp"

#include <algorithm>
#include <cmath>

#include "segrank/error.hpp"
#include "segrank/parallel.hpp"
#include "segrank/rng.hpp"
#include "segrank/stats.hpp"

namespace segrank {

std::vector<int> bootstrap_indices(std::uint64_t seed, int sample, int n_cases) {
  Rng rng(seed, static_cast<std::uint64_t>(sample) + 1);
  std::vector<int> idx(static_cast<std::size_t>(n_cases));
  for (int i = 0; i < n_cases; ++i)
    idx[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.bounded(static_cast<std::uint32_t>(n_cases)));
  return idx;
}

std::vector<RankingTable> bootstrap_rankings(const CaseMetricTable& table,
                                             const BootstrapConfig& config,
                                             const TaskRanker& ranker,
                                             int jobs) {
  if (config.n_samples < 1)
    fail(Errc::empty_input, "bootstrap needs at least one sample");
  std::vector<RankingTable> out(static_cast<std::size_t>(config.n_samples));
  parallel_for(config.n_samples, jobs, [&](std::int64_t s) {
    std::vector<int> idx =
        bootstrap_indices(config.seed, static_cast<int>(s), table.n_cases());
    out[static_cast<std::size_t>(s)] = ranker(table.resample(idx));
  });
  return out;
}

double kendall_tau(const RankingTable& a, const RankingTable& b) {
  if (a.algorithms != b.algorithms)
    fail(Errc::algorithm_set_mismatch,
         "rankings cover different algorithm sets");
  const std::size_t n = a.ranks.size();
  std::int64_t concordant = 0, discordant = 0, tied_a = 0, tied_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = a.ranks[i] - a.ranks[j];
      const double y = b.ranks[i] - b.ranks[j];
      if (x == 0.0 && y == 0.0) continue;
      if (x == 0.0) {
        ++tied_a;
      } else if (y == 0.0) {
        ++tied_b;
      } else if ((x > 0.0) == (y > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const std::int64_t cd = concordant + discordant;
  // Denominator terms: pairs not tied in a = cd + tied_b, not tied in b =
  // cd + tied_a.
  const std::int64_t na = cd + tied_b;
  const std::int64_t nb = cd + tied_a;
  if (na == 0 || nb == 0) return 0.0;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
}

BootstrapSummary summarize(const RankingTable& original,
                           std::span<const RankingTable> samples,
                           std::string task_id) {
  if (samples.empty()) fail(Errc::empty_input, "no bootstrap samples");
  BootstrapSummary s;
  s.task_id = std::move(task_id);
  s.n_samples = static_cast<int>(samples.size());
  s.algorithms = original.algorithms;
  s.rank_frequency.resize(original.algorithms.size());

  std::vector<double> taus;
  taus.reserve(samples.size());
  for (const RankingTable& sample : samples) {
    taus.push_back(kendall_tau(original, sample));
    for (std::size_t a = 0; a < sample.ranks.size(); ++a)
      ++s.rank_frequency[a][sample.ranks[a]];
  }
  std::sort(taus.begin(), taus.end());
  s.tau_median = quantile_sorted(taus, 0.5);
  s.tau_q1 = quantile_sorted(taus, 0.25);
  s.tau_q3 = quantile_sorted(taus, 0.75);
  return s;
}

}  // namespace segrank
