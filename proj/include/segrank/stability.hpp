#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "segrank/ranking.hpp"

namespace segrank {

struct BootstrapConfig {
  int n_samples = 1000;
  std::uint64_t seed = 0;
};

using TaskRanker = std::function<RankingTable(const CaseMetricTable&)>;

// Case indices (with replacement) for one bootstrap sample; a pure function
// of (seed, sample), so any evaluation order gives the same draws.
std::vector<int> bootstrap_indices(std::uint64_t seed, int sample, int n_cases);

// One RankingTable per sample: draw paired case indices, rebuild the table,
// re-rank. Samples are independent and may run on `jobs` threads; sample s
// always lands in slot s.
std::vector<RankingTable> bootstrap_rankings(const CaseMetricTable& table,
                                             const BootstrapConfig& config,
                                             const TaskRanker& ranker,
                                             int jobs = 1);

// Kendall's tau-b over the fractional rank vectors of two rankings of the
// same algorithm set. A ranking that is one total tie has an undefined
// denominator; 0 is returned by convention.
double kendall_tau(const RankingTable& a, const RankingTable& b);

struct BootstrapSummary {
  std::string task_id;
  int n_samples = 0;
  double tau_median = 0.0;
  double tau_q1 = 0.0;
  double tau_q3 = 0.0;
  std::vector<std::string> algorithms;
  // Per algorithm: achieved fractional rank -> number of samples. Fractional
  // ranks are exact halves, so the key is exact.
  std::vector<std::map<double, std::int64_t>> rank_frequency;
};

BootstrapSummary summarize(const RankingTable& original,
                           std::span<const RankingTable> samples,
                           std::string task_id);

}  // namespace segrank
