#include "segrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segrank/error.hpp"
#include "segrank/stats.hpp"

namespace segrank {

namespace {

constexpr int kExactCutoff = 25;

// Doubled mid-ranks of |d| over the nonzero differences. Doubling makes
// every rank an integer (a tie group spanning sorted positions i..j-1,
// 0-based, has mid-rank (i+j+1)/2). Returns pairs (doubled rank, positive).
struct RankedDiffs {
  std::vector<std::int64_t> doubled_ranks;
  std::vector<bool> positive;
  std::vector<std::int64_t> tie_sizes;
  std::int64_t w2 = 0;  // doubled W+ statistic
};

RankedDiffs rank_diffs(std::span<const double> nonzero) {
  const std::size_t n = nonzero.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(nonzero[a]) < std::fabs(nonzero[b]);
  });

  RankedDiffs out;
  out.doubled_ranks.resize(n);
  out.positive.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n &&
           std::fabs(nonzero[order[j]]) == std::fabs(nonzero[order[i]]))
      ++j;
    const std::int64_t doubled =
        static_cast<std::int64_t>(i) + static_cast<std::int64_t>(j) + 1;
    for (std::size_t k = i; k < j; ++k) {
      out.doubled_ranks[order[k]] = doubled;
      out.positive[order[k]] = nonzero[order[k]] > 0.0;
    }
    out.tie_sizes.push_back(static_cast<std::int64_t>(j - i));
    i = j;
  }
  for (std::size_t k = 0; k < n; ++k)
    if (out.positive[k]) out.w2 += out.doubled_ranks[k];
  return out;
}

std::vector<double> drop_zeros(std::span<const double> diffs) {
  std::vector<double> nz;
  nz.reserve(diffs.size());
  for (double d : diffs)
    if (d != 0.0) nz.push_back(d);
  return nz;
}

double exact_tail(const RankedDiffs& r) {
  const int n = static_cast<int>(r.doubled_ranks.size());
  std::int64_t maxsum = 0;
  for (std::int64_t d : r.doubled_ranks) maxsum += d;
  // ways[s] = number of sign assignments whose positive doubled-rank sum is s.
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(maxsum) + 1, 0);
  ways[0] = 1;
  for (std::int64_t d : r.doubled_ranks) {
    for (std::int64_t s = maxsum; s >= d; --s)
      ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - d)];
  }
  std::uint64_t tail = 0;
  for (std::int64_t s = r.w2; s <= maxsum; ++s)
    tail += ways[static_cast<std::size_t>(s)];
  return std::ldexp(static_cast<double>(tail), -n);
}

double normal_tail(const RankedDiffs& r) {
  const double n = static_cast<double>(r.doubled_ranks.size());
  const double w = static_cast<double>(r.w2) / 2.0;
  const double mu = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  for (std::int64_t t : r.tie_sizes) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double z = (w - mu - 0.5) / std::sqrt(var);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace

const char* CaseMetricTable::metric_name(int m) noexcept {
  return m == 0 ? "DSC" : "NSD";
}

void CaseMetricTable::allocate() {
  values.assign(algorithms.size() * case_ids.size() * roi_ids.size() *
                    static_cast<std::size_t>(kMetricCount),
                0.0);
}

CaseMetricTable CaseMetricTable::resample(std::span<const int> case_indices) const {
  CaseMetricTable out;
  out.task_id = task_id;
  out.algorithms = algorithms;
  out.roi_ids = roi_ids;
  out.case_ids.reserve(case_indices.size());
  for (std::size_t i = 0; i < case_indices.size(); ++i)
    out.case_ids.push_back("draw_" + std::to_string(i));
  out.allocate();
  for (int a = 0; a < n_algorithms(); ++a)
    for (std::size_t c = 0; c < case_indices.size(); ++c)
      for (int r = 0; r < n_rois(); ++r)
        for (int m = 0; m < kMetricCount; ++m)
          out.at(a, static_cast<int>(c), r, m) = at(a, case_indices[c], r, m);
  return out;
}

WilcoxonResult wilcoxon_one_sided(std::span<const double> diffs, double alpha) {
  if (diffs.empty()) fail(Errc::empty_input, "signed-rank test needs differences");
  std::vector<double> nz = drop_zeros(diffs);
  if (nz.empty()) return {1.0, false};
  RankedDiffs r = rank_diffs(nz);
  double p = nz.size() <= kExactCutoff ? exact_tail(r) : normal_tail(r);
  return {p, p < alpha};
}

double wilcoxon_exact_p(std::span<const double> diffs) {
  std::vector<double> nz = drop_zeros(diffs);
  if (nz.empty()) return 1.0;
  return exact_tail(rank_diffs(nz));
}

double wilcoxon_normal_p(std::span<const double> diffs) {
  std::vector<double> nz = drop_zeros(diffs);
  if (nz.empty()) return 1.0;
  return normal_tail(rank_diffs(nz));
}

std::vector<double> rank_from_scores(std::span<const double> scores,
                                     bool higher_is_better) {
  if (scores.empty()) fail(Errc::empty_input, "ranking needs scores");
  return midrank(scores, !higher_is_better);
}

SignificanceResult significance_scores(const CaseMetricTable& table, int roi,
                                       int metric, double alpha) {
  const int na = table.n_algorithms();
  const int nc = table.n_cases();
  SignificanceResult res;
  res.task_id = table.task_id;
  res.roi_id = table.roi_ids[static_cast<std::size_t>(roi)];
  res.metric = CaseMetricTable::metric_name(metric);
  res.alpha = alpha;
  res.algorithms = table.algorithms;
  res.scores.assign(static_cast<std::size_t>(na), 0);
  res.p_values.assign(static_cast<std::size_t>(na) * na, 1.0);

  std::vector<double> diffs(static_cast<std::size_t>(nc));
  for (int l = 0; l < na; ++l) {
    for (int lp = 0; lp < na; ++lp) {
      if (lp == l) continue;
      for (int c = 0; c < nc; ++c)
        diffs[static_cast<std::size_t>(c)] =
            table.at(l, c, roi, metric) - table.at(lp, c, roi, metric);
      WilcoxonResult w = wilcoxon_one_sided(diffs, alpha);
      res.p_values[static_cast<std::size_t>(l) * na + lp] = w.p_value;
      if (w.significant) ++res.scores[static_cast<std::size_t>(l)];
    }
  }
  std::vector<double> scores_d(res.scores.begin(), res.scores.end());
  res.ranks = rank_from_scores(scores_d, true);
  return res;
}

RankingTable task_rank(std::span<const SignificanceResult> results,
                       std::span<const std::string> roi_ids) {
  if (results.empty()) fail(Errc::missing_roi_metric_result, "no results");
  const std::vector<std::string>& algos = results[0].algorithms;
  for (const auto& r : results) {
    if (r.algorithms != algos)
      fail(Errc::algorithm_coverage_mismatch,
           "inconsistent algorithm lists across (roi, metric) results");
  }

  std::vector<const SignificanceResult*> ordered;
  for (const std::string& roi : roi_ids) {
    for (int m = 0; m < CaseMetricTable::kMetricCount; ++m) {
      const char* metric = CaseMetricTable::metric_name(m);
      const SignificanceResult* found = nullptr;
      for (const auto& r : results) {
        if (r.roi_id == roi && r.metric == metric) {
          found = &r;
          break;
        }
      }
      if (!found)
        fail(Errc::missing_roi_metric_result,
             "no result for roi '" + roi + "' metric " + metric);
      ordered.push_back(found);
    }
  }

  RankingTable out;
  out.level = RankLevel::task;
  out.algorithms = algos;
  out.scores.resize(algos.size());
  for (std::size_t a = 0; a < algos.size(); ++a) {
    std::vector<double> ranks;
    ranks.reserve(ordered.size());
    for (const SignificanceResult* r : ordered) ranks.push_back(r->ranks[a]);
    out.scores[a] = mean_sorted(ranks);
  }
  out.ranks = rank_from_scores(out.scores, false);
  return out;
}

RankingTable phase_ranking(std::span<const RankingTable> task_tables) {
  if (task_tables.empty())
    fail(Errc::algorithm_coverage_mismatch, "phase has no task rankings");
  const std::vector<std::string>& algos = task_tables[0].algorithms;
  for (const auto& t : task_tables) {
    if (t.algorithms != algos)
      fail(Errc::algorithm_coverage_mismatch,
           "every algorithm must appear in every task of the phase");
  }
  RankingTable out;
  out.level = RankLevel::phase;
  out.algorithms = algos;
  out.scores.resize(algos.size());
  for (std::size_t a = 0; a < algos.size(); ++a) {
    std::vector<double> ranks;
    ranks.reserve(task_tables.size());
    for (const auto& t : task_tables) ranks.push_back(t.ranks[a]);
    out.scores[a] = mean_sorted(ranks);
  }
  out.ranks = rank_from_scores(out.scores, false);
  return out;
}

RankingTable pooled_phase_ranking(std::span<const SignificanceResult> results) {
  if (results.empty())
    fail(Errc::missing_roi_metric_result, "no results to pool");
  const std::vector<std::string>& algos = results[0].algorithms;
  for (const auto& r : results) {
    if (r.algorithms != algos)
      fail(Errc::algorithm_coverage_mismatch,
           "inconsistent algorithm lists across pooled results");
  }
  RankingTable out;
  out.level = RankLevel::phase;
  out.algorithms = algos;
  out.scores.resize(algos.size());
  for (std::size_t a = 0; a < algos.size(); ++a) {
    std::vector<double> ranks;
    ranks.reserve(results.size());
    for (const auto& r : results) ranks.push_back(r.ranks[a]);
    out.scores[a] = mean_sorted(ranks);
  }
  out.ranks = rank_from_scores(out.scores, false);
  return out;
}

RankVariant parse_variant(const std::string& name) {
  if (name == "significance") return RankVariant::significance;
  if (name == "mean_then_rank") return RankVariant::mean_then_rank;
  if (name == "median_then_rank") return RankVariant::median_then_rank;
  if (name == "rank_then_mean") return RankVariant::rank_then_mean;
  fail(Errc::unknown_variant, "no ranking variant named '" + name + "'");
}

const char* variant_name(RankVariant v) noexcept {
  switch (v) {
    case RankVariant::significance: return "significance";
    case RankVariant::mean_then_rank: return "mean_then_rank";
    case RankVariant::median_then_rank: return "median_then_rank";
    case RankVariant::rank_then_mean: return "rank_then_mean";
  }
  return "?";
}

RankingTable variant_ranking(const CaseMetricTable& table, RankVariant variant,
                             int roi, int metric, double alpha) {
  const int na = table.n_algorithms();
  const int nc = table.n_cases();
  RankingTable out;
  out.level = RankLevel::roi_metric;
  out.algorithms = table.algorithms;
  out.scores.resize(static_cast<std::size_t>(na));

  switch (variant) {
    case RankVariant::significance: {
      SignificanceResult res = significance_scores(table, roi, metric, alpha);
      out.scores.assign(res.scores.begin(), res.scores.end());
      out.ranks = res.ranks;
      return out;
    }
    case RankVariant::mean_then_rank:
    case RankVariant::median_then_rank: {
      std::vector<double> vals(static_cast<std::size_t>(nc));
      for (int a = 0; a < na; ++a) {
        for (int c = 0; c < nc; ++c)
          vals[static_cast<std::size_t>(c)] = table.at(a, c, roi, metric);
        out.scores[static_cast<std::size_t>(a)] =
            variant == RankVariant::mean_then_rank ? mean_sorted(vals)
                                                   : quantile(vals, 0.5);
      }
      out.ranks = rank_from_scores(out.scores, true);
      return out;
    }
    case RankVariant::rank_then_mean: {
      std::vector<std::vector<double>> per_algo(
          static_cast<std::size_t>(na));
      std::vector<double> col(static_cast<std::size_t>(na));
      for (int c = 0; c < nc; ++c) {
        for (int a = 0; a < na; ++a)
          col[static_cast<std::size_t>(a)] = table.at(a, c, roi, metric);
        std::vector<double> case_ranks = rank_from_scores(col, true);
        for (int a = 0; a < na; ++a)
          per_algo[static_cast<std::size_t>(a)].push_back(
              case_ranks[static_cast<std::size_t>(a)]);
      }
      for (int a = 0; a < na; ++a)
        out.scores[static_cast<std::size_t>(a)] =
            mean_sorted(per_algo[static_cast<std::size_t>(a)]);
      out.ranks = rank_from_scores(out.scores, false);
      return out;
    }
  }
  fail(Errc::unknown_variant, "unhandled ranking variant");
}

}  // namespace segrank
