#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace segrank {

// Metric values for one task: value[algorithm][case][roi][metric].
// Metric index 0 is DSC, 1 is NSD. The table must be fully populated;
// a missing entry is an input error, never a zero.
struct CaseMetricTable {
  static constexpr int kMetricCount = 2;
  static const char* metric_name(int m) noexcept;

  std::string task_id;
  std::vector<std::string> algorithms;
  std::vector<std::string> case_ids;
  std::vector<std::string> roi_ids;
  std::vector<double> values;

  int n_algorithms() const { return static_cast<int>(algorithms.size()); }
  int n_cases() const { return static_cast<int>(case_ids.size()); }
  int n_rois() const { return static_cast<int>(roi_ids.size()); }

  std::size_t index(int a, int c, int r, int m) const {
    return ((static_cast<std::size_t>(a) * case_ids.size() + c) * roi_ids.size() +
            r) *
               kMetricCount +
           m;
  }
  double at(int a, int c, int r, int m) const { return values[index(a, c, r, m)]; }
  double& at(int a, int c, int r, int m) { return values[index(a, c, r, m)]; }

  void allocate();

  // Paired resample: the same case indices (with repetition) for every
  // algorithm. Resampled case ids keep positional names.
  CaseMetricTable resample(std::span<const int> case_indices) const;
};

struct WilcoxonResult {
  double p_value = 1.0;
  bool significant = false;
};

// One-sided signed-rank test of H1: median difference > 0. Zero differences
// are discarded; |d| ties get mid-ranks. Exact tail by sign enumeration for
// n <= 25 nonzero differences, normal approximation with tie-corrected
// variance and 0.5 continuity correction above. All-zero input gives p = 1.
// Significance is strict: p < alpha.
WilcoxonResult wilcoxon_one_sided(std::span<const double> diffs, double alpha);

// The two tail computations behind wilcoxon_one_sided, exposed so they can
// be cross-checked against each other and against enumeration oracles.
double wilcoxon_exact_p(std::span<const double> diffs);
double wilcoxon_normal_p(std::span<const double> diffs);

struct SignificanceResult {
  std::string task_id;
  std::string roi_id;
  std::string metric;
  double alpha = 0.05;
  std::vector<std::string> algorithms;
  std::vector<int> scores;
  std::vector<double> p_values;  // row-major [l][l']: p that l beats l'
  std::vector<double> ranks;

  double p_at(int l, int lp) const {
    return p_values[static_cast<std::size_t>(l) * algorithms.size() + lp];
  }
};

// Mid-rank assignment over scores; rank 1 is the best score.
std::vector<double> rank_from_scores(std::span<const double> scores,
                                     bool higher_is_better);

// Step 2+3 of the ranking scheme: every ordered algorithm pair is tested on
// per-case differences; an algorithm's score is the number of others it
// beats significantly.
SignificanceResult significance_scores(const CaseMetricTable& table, int roi,
                                       int metric, double alpha);

enum class RankLevel { roi_metric, task, phase };

struct RankingTable {
  RankLevel level = RankLevel::roi_metric;
  std::vector<std::string> algorithms;
  std::vector<double> scores;
  std::vector<double> ranks;
};

// Task score = mean of an algorithm's fractional ranks over every
// (roi, metric) pair of the task; task ranks re-rank those means, lower
// mean better. `results` must hold exactly one entry per (roi, metric).
RankingTable task_rank(std::span<const SignificanceResult> results,
                       std::span<const std::string> roi_ids);

// Phase score = mean of task ranks; lower better.
RankingTable phase_ranking(std::span<const RankingTable> task_tables);

// Alternative phase aggregation: mean over all (roi, metric) ranks pooled
// across the phase's tasks, unweighted by task.
RankingTable pooled_phase_ranking(std::span<const SignificanceResult> results);

enum class RankVariant { significance, mean_then_rank, median_then_rank, rank_then_mean };

RankVariant parse_variant(const std::string& name);
const char* variant_name(RankVariant v) noexcept;

RankingTable variant_ranking(const CaseMetricTable& table, RankVariant variant,
                             int roi, int metric, double alpha);

}  // namespace segrank
