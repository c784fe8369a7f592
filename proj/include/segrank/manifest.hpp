#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "segrank/metrics.hpp"

namespace segrank {

struct TaskConfig {
  std::string task_id;
  std::filesystem::path gt_dir;  // resolved relative to the manifest file
  std::vector<RoiSpec> rois;
  std::vector<std::string> cases;
};

struct PhaseConfig {
  std::string name;
  std::vector<TaskConfig> tasks;
};

struct AlgorithmConfig {
  std::string name;
  // task_id -> predictions directory, resolved relative to the manifest file.
  std::vector<std::pair<std::string, std::filesystem::path>> predictions;

  const std::filesystem::path* predictions_for(const std::string& task) const {
    for (const auto& [t, dir] : predictions)
      if (t == task) return &dir;
    return nullptr;
  }
};

struct ChallengeManifest {
  std::filesystem::path root;  // directory of the manifest file
  std::vector<PhaseConfig> phases;
  std::vector<AlgorithmConfig> algorithms;
  double alpha = 0.05;
  std::vector<std::string> variants;
  int bootstrap_samples = 1000;
  std::uint64_t bootstrap_seed = 0;

  std::vector<const TaskConfig*> all_tasks() const;
  const TaskConfig* find_task(const std::string& task_id) const;
  const PhaseConfig* phase_of(const std::string& task_id) const;
};

// Parses and validates the JSON challenge manifest. Structural problems
// raise ManifestError; directory existence is checked at use, not here.
ChallengeManifest load_manifest(const std::filesystem::path& path);

}  // namespace segrank
