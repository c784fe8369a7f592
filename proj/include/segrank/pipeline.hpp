#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "segrank/manifest.hpp"
#include "segrank/report.hpp"

namespace segrank {

// Options shared by the pipeline stages. Optional fields override the
// manifest's ranking/bootstrap configuration when set (CLI flags).
struct RunOptions {
  std::filesystem::path out_dir;
  std::vector<std::string> tasks;  // task filter; empty selects all
  std::string phase;               // phase filter; empty selects all
  int jobs = 1;
  std::optional<double> alpha;
  std::optional<std::vector<std::string>> variants;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
};

std::filesystem::path metrics_csv_path(const std::filesystem::path& out_dir,
                                       const std::string& task_id);

// evaluate: ground truth vs every algorithm's predictions, one
// metrics_<task>.csv per selected task. Deterministic for any jobs value.
void run_evaluate(const ChallengeManifest& manifest, const RunOptions& options);

// rank: significance rankings per (roi, metric), task and phase aggregates,
// requested ranking variants; writes leaderboard.json and leaderboard.csv.
void run_rank(const ChallengeManifest& manifest, const RunOptions& options);

// bootstrap: resampled task rankings; writes bootstrap.json and
// rank_frequency.csv.
void run_bootstrap(const ChallengeManifest& manifest, const RunOptions& options);

// report: renders every plot family whose inputs exist under out_dir,
// skipping the rest with a warning.
void run_report(const ChallengeManifest& manifest, const RunOptions& options);

// validate: check a submission directory against one task's reference grids.
ValidationReport run_validate(const ChallengeManifest& manifest,
                              const std::string& task_id,
                              const std::filesystem::path& submission_dir,
                              const RunOptions& options);

}  // namespace segrank
