#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "segrank/metrics.hpp"
#include "segrank/ranking.hpp"
#include "segrank/stability.hpp"

namespace segrank {

using Json = nlohmann::ordered_json;

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// One CSV field, quoted when it contains a comma, quote, or newline.
std::string csv_field(const std::string& s);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Canonical metric interchange row. The flag column joins the record flags
// that apply to the row's metric (gt_empty, pred_empty, undefined_substituted)
// with ';', or stays empty.
struct MetricRow {
  std::string task;
  std::string algorithm;
  std::string case_id;
  std::string roi;
  std::string metric;
  double value = 0.0;
  std::string flag;
};

std::vector<MetricRow> metric_rows(const std::string& task,
                                   const std::string& algorithm,
                                   std::span<const CaseMetricRecord> records);

std::string metrics_csv(std::span<const MetricRow> rows);
std::vector<MetricRow> parse_metrics_csv(const std::string& text,
                                         const std::string& source);

// Builds the fully populated table; any missing or unexpected entry is an
// error, and every value must lie in [0, 1].
CaseMetricTable table_from_rows(std::span<const MetricRow> rows,
                                const std::string& task_id,
                                std::span<const std::string> algorithms,
                                std::span<const std::string> case_ids,
                                std::span<const std::string> roi_ids);

Json ranking_to_json(const RankingTable& table);
RankingTable ranking_from_json(const Json& j);

Json significance_to_json(const SignificanceResult& res);

Json bootstrap_summary_to_json(const BootstrapSummary& summary,
                               std::uint64_t seed);

// rank_frequency.csv rows: task,algorithm,rank,count.
std::string rank_frequency_csv(std::span<const BootstrapSummary> summaries);

}  // namespace segrank
