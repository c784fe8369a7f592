#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "oracles.hpp"
#include "segrank/ranking.hpp"
#include "segrank/rng.hpp"

using namespace segrank;

namespace {

// N algorithms x C cases, single roi, both metrics set to the same values.
CaseMetricTable make_table(const std::vector<std::vector<double>>& by_algo) {
  CaseMetricTable t;
  t.task_id = "toy";
  for (std::size_t a = 0; a < by_algo.size(); ++a)
    t.algorithms.push_back("algo" + std::to_string(a));
  for (std::size_t c = 0; c < by_algo[0].size(); ++c)
    t.case_ids.push_back("case" + std::to_string(c));
  t.roi_ids.push_back("roi");
  t.allocate();
  for (std::size_t a = 0; a < by_algo.size(); ++a)
    for (std::size_t c = 0; c < by_algo[0].size(); ++c)
      for (int m = 0; m < CaseMetricTable::kMetricCount; ++m)
        t.at(static_cast<int>(a), static_cast<int>(c), 0, m) = by_algo[a][c];
  return t;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc{};
}

}  // namespace

TEST_CASE("wilcoxon hand values") {
  CHECK(wilcoxon_one_sided(std::vector<double>{1.0}, 0.05).p_value == 0.5);
  CHECK(wilcoxon_one_sided(std::vector<double>{1.0, 2.0}, 0.05).p_value == 0.25);
  //

  // |d| tie between +1 and -1: mid-ranks 1.5 each, W = 1.5; 3 of 4 sign
  // assignments reach 1.5.
  CHECK(wilcoxon_one_sided(std::vector<double>{1.0, -1.0}, 0.05).p_value ==
        0.75);
  // ranks 1,2,3; W = 3; subsets with sum >= 3: {3},{1,2},{1,3},{2,3},{1,2,3}.
  CHECK(wilcoxon_one_sided(std::vector<double>{1.0, 2.0, -3.0}, 0.05).p_value ==
        0.625);
  // zeros are discarded, not ranked
  CHECK(wilcoxon_one_sided(std::vector<double>{0.0, 1.0}, 0.05).p_value == 0.5);
  // all-positive n=5: p = 2^-5
  CHECK(wilcoxon_one_sided(std::vector<double>{1, 2, 3, 4, 5}, 0.05).p_value ==
        0.03125);
}

TEST_CASE("wilcoxon degenerate inputs") {
  const WilcoxonResult all_zero =
      wilcoxon_one_sided(std::vector<double>{0.0, 0.0, 0.0}, 0.05);
  CHECK(all_zero.p_value == 1.0);
  CHECK_FALSE(all_zero.significant);
  CHECK(code_of([] { wilcoxon_one_sided({}, 0.05); }) == Errc::empty_input);
}

TEST_CASE("significance is strict inequality against alpha") {
  // n=4 all positive: p = 1/16 = 0.0625.
  const std::vector<double> d{1, 2, 3, 4};
  CHECK_FALSE(wilcoxon_one_sided(d, 0.0625).significant);
  CHECK(wilcoxon_one_sided(d, 0.0626).significant);
}

TEST_CASE("exact tail matches enumeration for n <= 12, ties included") {
  Rng rng(404);
  for (int n = 1; n <= 12; ++n) {
    for (int rep = 0; rep < 12; ++rep) {
      std::vector<double> d(n);
      for (auto& x : d) {
        // small integer lattice forces heavy |d| ties and zeros
        x = static_cast<double>(static_cast<int>(rng.bounded(7)) - 3);
      }
      const double got = wilcoxon_exact_p(d);
      const double want = oracle::wilcoxon_p(d);
      CAPTURE(n);
      CAPTURE(rep);
      REQUIRE(got == want);
    }
  }
}

TEST_CASE("normal approximation is close to the exact tail near the cutoff") {
  Rng rng(405);
  for (int n = 20; n <= 25; ++n) {
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<double> d(n);
      for (auto& x : d)
        x = (rng.uniform() - 0.45) + (rng.bounded(4) == 0 ? 0.5 : 0.0);
      const double exact = wilcoxon_exact_p(d);
      const double approx = wilcoxon_normal_p(d);
      CAPTURE(n);
      REQUIRE(std::fabs(exact - approx) < 0.02);
    }
  }
}

TEST_CASE("rank_from_scores mid-ranks ties in both directions") {
  const std::vector<double> scores{3, 1, 3, 2};
  CHECK(rank_from_scores(scores, true) ==
        std::vector<double>{1.5, 4.0, 1.5, 3.0});
  CHECK(rank_from_scores(scores, false) ==
        std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("significance scores count strict pairwise wins") {
  // algo0 dominates everyone, algo1 dominates algo2; n=6 so the one-sided
  // all-positive p = 1/64 < 0.05.
  const CaseMetricTable t = make_table({
      {0.9, 0.91, 0.92, 0.93, 0.94, 0.95},
      {0.5, 0.51, 0.52, 0.53, 0.54, 0.55},
      {0.1, 0.11, 0.12, 0.13, 0.14, 0.15},
  });
  const SignificanceResult r = significance_scores(t, 0, 0, 0.05);
  CHECK(r.scores == std::vector<int>{2, 1, 0});
  CHECK(r.ranks == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(r.p_at(0, 1) < 0.05);
  CHECK(r.p_at(1, 0) == 1.0);  // all-negative differences
  CHECK(r.metric == "DSC");
  CHECK(r.alpha == 0.05);
}

TEST_CASE("indistinguishable algorithms all tie at the middle rank") {
  const CaseMetricTable t = make_table({
      {0.5, 0.6, 0.7},
      {0.5, 0.6, 0.7},
      {0.5, 0.6, 0.7},
      {0.5, 0.6, 0.7},
  });
  const SignificanceResult r = significance_scores(t, 0, 1, 0.05);
  CHECK(r.scores == std::vector<int>{0, 0, 0, 0});
  CHECK(r.ranks == std::vector<double>{2.5, 2.5, 2.5, 2.5});
}

TEST_CASE("single-algorithm task degenerates to score 0 rank 1") {
  const CaseMetricTable t = make_table({{0.4, 0.5}});
  const SignificanceResult r = significance_scores(t, 0, 0, 0.05);
  CHECK(r.scores == std::vector<int>{0});
  CHECK(r.ranks == std::vector<double>{1.0});
}

TEST_CASE("task_rank averages roi/metric ranks and re-ranks") {
  SignificanceResult a;
  a.task_id = "t";
  a.roi_id = "r1";
  a.metric = "DSC";
  a.algorithms = {"x", "y"};
  a.ranks = {1.0, 2.0};
  SignificanceResult b = a;
  b.metric = "NSD";
  b.ranks = {2.0, 1.0};
  const std::vector<std::string> rois{"r1"};

  const RankingTable t = task_rank(std::vector{a, b}, rois);
  CHECK(t.scores == std::vector<double>{1.5, 1.5});
  CHECK(t.ranks == std::vector<double>{1.5, 1.5});
  CHECK(t.level == RankLevel::task);

  // Missing (roi, metric) pair is an error, not a silent skip.
  CHECK(code_of([&] { task_rank(std::vector{a}, rois); }) ==
        Errc::missing_roi_metric_result);

  // Coverage disagreement is an error.
  SignificanceResult c = b;
  c.algorithms = {"x", "z"};
  CHECK(code_of([&] { task_rank(std::vector{a, c}, rois); }) ==
        Errc::algorithm_coverage_mismatch);
}

TEST_CASE("phase aggregation averages task ranks") {
  RankingTable t1;
  t1.level = RankLevel::task;
  t1.algorithms = {"x", "y", "z"};
  t1.ranks = {1.0, 2.0, 3.0};
  t1.scores = t1.ranks;
  RankingTable t2 = t1;
  t2.ranks = {2.0, 1.0, 3.0};
  const RankingTable phase = phase_ranking(std::vector{t1, t2});
  CHECK(phase.scores == std::vector<double>{1.5, 1.5, 3.0});
  CHECK(phase.ranks == std::vector<double>{1.5, 1.5, 3.0});
  CHECK(phase.level == RankLevel::phase);
}

TEST_CASE("variant parsing is strict") {
  CHECK(parse_variant("significance") == RankVariant::significance);
  CHECK(parse_variant("mean_then_rank") == RankVariant::mean_then_rank);
  CHECK(parse_variant("median_then_rank") == RankVariant::median_then_rank);
  CHECK(parse_variant("rank_then_mean") == RankVariant::rank_then_mean);
  CHECK(code_of([] { parse_variant("meanthenrank"); }) ==
        Errc::unknown_variant);
}

TEST_CASE("mean_then_rank and median_then_rank order by their aggregates") {
  // Dyadic values keep every mean and median exact. The two aggregates
  // disagree on purpose: means 0.5 / 0.5625 / 0.46875, medians 0.5 / 0.625
  // / 0.625 (a median tie).
  const CaseMetricTable t = make_table({
      {0.5, 0.5, 0.5, 0.5},
      {1.0, 1.0, 0.25, 0.0},
      {0.625, 0.625, 0.625, 0.0},
  });
  const RankingTable mean_r =
      variant_ranking(t, RankVariant::mean_then_rank, 0, 0, 0.05);
  CHECK(mean_r.scores == std::vector<double>{0.5, 0.5625, 0.46875});
  CHECK(mean_r.ranks == std::vector<double>{2.0, 1.0, 3.0});
  const RankingTable med_r =
      variant_ranking(t, RankVariant::median_then_rank, 0, 0, 0.05);
  CHECK(med_r.scores == std::vector<double>{0.5, 0.625, 0.625});
  CHECK(med_r.ranks == std::vector<double>{3.0, 1.5, 1.5});
}

TEST_CASE("rank_then_mean averages per-case mid-ranks, lower better") {
  // case ranks: algo0: 1,2 ; algo1: 2,1 -> means 1.5, 1.5 -> tie
  const CaseMetricTable tie = make_table({
      {0.9, 0.1},
      {0.1, 0.9},
  });
  const RankingTable r =
      variant_ranking(tie, RankVariant::rank_then_mean, 0, 0, 0.05);
  CHECK(r.scores == std::vector<double>{1.5, 1.5});
  CHECK(r.ranks == std::vector<double>{1.5, 1.5});

  // algo0 wins case 0 by a mile, loses case 1 narrowly; per-case ranking
  // ignores margins entirely.
  const CaseMetricTable margins = make_table({
      {0.99, 0.50},
      {0.01, 0.51},
  });
  const RankingTable m =
      variant_ranking(margins, RankVariant::rank_then_mean, 0, 0, 0.05);
  CHECK(m.scores == std::vector<double>{1.5, 1.5});
}

TEST_CASE("significance variant equals the significance ranking") {
  Rng rng(7);
  std::vector<std::vector<double>> rows(4, std::vector<double>(12));
  for (auto& row : rows)
    for (auto& x : row) x = rng.bounded(64) / 63.0;
  const CaseMetricTable t = make_table(rows);
  const RankingTable v =
      variant_ranking(t, RankVariant::significance, 0, 1, 0.05);
  const SignificanceResult s = significance_scores(t, 0, 1, 0.05);
  CHECK(v.ranks == s.ranks);
}

TEST_CASE("resampling keeps algorithm pairing intact") {
  const CaseMetricTable t = make_table({
      {0.1, 0.2, 0.3},
      {0.4, 0.5, 0.6},
  });
  const std::vector<int> idx{2, 0, 2};
  const CaseMetricTable r = t.resample(idx);
  CHECK(r.n_cases() == 3);
  CHECK(r.at(0, 0, 0, 0) == 0.3);
  CHECK(r.at(1, 0, 0, 0) == 0.6);
  CHECK(r.at(0, 1, 0, 0) == 0.1);
  CHECK(r.at(1, 2, 0, 1) == 0.6);
}
