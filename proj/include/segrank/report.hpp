#pragma once

#include <array>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "segrank/stability.hpp"

namespace segrank {

struct BoxplotStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

// Linear-interpolation quartiles, Tukey whiskers at the most extreme data
// points within 1.5*IQR of the box, everything further listed as outlier.
BoxplotStats boxplot_stats(std::span<const double> values);

// One algorithm's raw metric values, one list per ROI.
struct BoxGroupSeries {
  std::string algorithm;
  std::vector<std::pair<std::string, std::vector<double>>> roi_values;
};

// One algorithm's rank samples, one list per phase.
struct RankDistribution {
  std::string algorithm;
  std::vector<std::pair<std::string, std::vector<double>>> phase_ranks;
};

struct VariantColumn {
  std::string variant;
  std::vector<double> ranks;  // aligned with the algorithm list
};

// Renderers return a complete standalone SVG document. Drawn data elements
// carry stable classes (box, dot, outlier, line, bar) so emissions are
// countable and golden-diffable.
std::string render_dsc_boxplot(const std::string& task_id,
                               std::span<const BoxGroupSeries> series);
std::string render_rank_boxplot(std::span<const RankDistribution> dists,
                                double max_rank);
std::string render_line_plot(const std::string& task_id,
                             std::span<const std::string> algorithms,
                             std::span<const VariantColumn> columns);
std::string render_stacked_frequency(std::span<const BootstrapSummary> summaries);

// CSV of the BoxplotStats behind a dsc boxplot.
std::string boxplot_stats_csv(std::span<const BoxGroupSeries> series);

struct CaseReference {
  std::string case_id;
  std::array<int, 3> extents{};
  std::array<double, 3> spacing{};
};

struct SubmissionManifest {
  std::string task_id;
  std::vector<CaseReference> cases;
  std::set<std::int32_t> legal_labels;
};

struct CaseCheck {
  std::string case_id;
  bool ok = false;
  std::string code;    // empty when ok
  std::string detail;  // empty when ok
};

struct ValidationReport {
  std::string task_id;
  bool valid = false;
  std::vector<CaseCheck> cases;
};

// Case file lookup: "<case_id>.nii" or "<case_id>.nii.gz" under dir; empty
// path when neither exists.
std::filesystem::path resolve_case_file(const std::filesystem::path& dir,
                                        const std::string& case_id);

// Checks that every expected case is present, parses, matches the reference
// grid and spacing, and uses only legal label values. Failures are report
// content, never exceptions.
ValidationReport validate_submission(const std::filesystem::path& dir,
                                     const SubmissionManifest& manifest);

}  // namespace segrank
