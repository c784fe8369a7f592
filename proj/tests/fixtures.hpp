#pragma once

// Synthetic challenge construction shared by the CLI tests, the acceptance
// runner and the golden-fixture generator. Algorithms are graded by shifting
// the ground-truth balls: shift 0 reproduces the truth, larger shifts are
// strictly worse on every case, planting the ordering
// atlas > bravo > cobalt (> delta where present).

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "segrank/nifti.hpp"
#include "segrank/serialize.hpp"

namespace fixtures {

inline void add_ball(segrank::LabelVolume& v, const std::array<int, 3>& center,
                     int radius, std::int32_t label) {
  for (int z = 0; z < v.extents[2]; ++z)
    for (int y = 0; y < v.extents[1]; ++y)
      for (int x = 0; x < v.extents[0]; ++x) {
        const int dx = x - center[0], dy = y - center[1], dz = z - center[2];
        if (dx * dx + dy * dy + dz * dz <= radius * radius)
          v.labels[static_cast<std::size_t>(v.index(x, y, z))] = label;
      }
}

inline segrank::LabelVolume blank(const std::array<int, 3>& extents,
                                  const std::array<double, 3>& spacing) {
  segrank::LabelVolume v;
  v.extents = extents;
  v.spacing = spacing;
  v.labels.assign(static_cast<std::size_t>(v.voxel_count()), 0);
  return v;
}

struct TaskShape {
  std::string task_id;
  std::string phase;
  std::array<int, 3> extents;
  std::array<double, 3> spacing;
  int n_rois = 1;  // 1 or 2; roi r uses label r+1
  int n_cases = 6;
};

inline const std::vector<TaskShape>& default_tasks() {
  static const std::vector<TaskShape> tasks = {
      {"task_alpha", "development", {10, 9, 8}, {1.0, 1.0, 2.5}, 2, 6},
      {"task_beta", "development", {9, 9, 9}, {0.75, 0.75, 1.25}, 1, 6},
      {"task_gamma", "mystery", {8, 10, 9}, {1.0, 1.0, 1.0}, 1, 6},
  };
  return tasks;
}

// Case geometry is a pure function of (task, case, roi); `shift` displaces
// every ball along x, degrading both metrics monotonically.
inline segrank::LabelVolume case_volume(const TaskShape& task, int case_index,
                                        int shift) {
  segrank::LabelVolume v = blank(task.extents, task.spacing);
  const int r1 = 2 + case_index % 2;
  add_ball(v,
           {3 + case_index % 3 + shift, task.extents[1] / 2,
            task.extents[2] / 2 - 1},
           r1, 1);
  if (task.n_rois > 1)
    add_ball(v,
             {task.extents[0] - 3 + shift, task.extents[1] - 3,
              task.extents[2] - 3},
             1 + case_index % 2, 2);
  return v;
}

// Varied on purpose: datatype cycles per case, odd cases are gzipped, and
// one ground-truth file is written big-endian.
inline void write_case_file(const segrank::LabelVolume& v,
                            const std::filesystem::path& dir,
                            const std::string& case_id, int flavor,
                            bool big_endian = false) {
  std::filesystem::create_directories(dir);
  static const segrank::NiftiDatatype kTypes[] = {
      segrank::NiftiDatatype::u8,  segrank::NiftiDatatype::u16,
      segrank::NiftiDatatype::i16, segrank::NiftiDatatype::i32,
      segrank::NiftiDatatype::f32, segrank::NiftiDatatype::f64,
  };
  const auto dt = kTypes[flavor % 6];
  const bool gz = flavor % 2 == 1;
  const auto path = dir / (case_id + (gz ? ".nii.gz" : ".nii"));
  auto bytes = segrank::write_synthetic(v, dt, big_endian);
  if (gz) bytes = segrank::gzip_compress(bytes);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::string case_name(int i) { return "c" + std::to_string(i); }

struct AlgorithmPlant {
  std::string name;
  int shift;
};

inline const std::vector<AlgorithmPlant>& default_algorithms() {
  static const std::vector<AlgorithmPlant> algos = {
      {"atlas", 0}, {"bravo", 1}, {"cobalt", 2}, {"delta", 3}};
  return algos;
}

// Builds gt/ and submissions/ trees plus challenge.json under root.
inline std::filesystem::path write_challenge(
    const std::filesystem::path& root,
    const std::vector<TaskShape>& tasks = default_tasks(),
    const std::vector<AlgorithmPlant>& algorithms = default_algorithms(),
    int bootstrap_samples = 50, std::uint64_t bootstrap_seed = 9) {
  namespace fs = std::filesystem;
  using segrank::Json;

  Json phases = Json::array();
  std::vector<std::string> phase_order;
  for (const auto& task : tasks)
    if (std::find(phase_order.begin(), phase_order.end(), task.phase) ==
        phase_order.end())
      phase_order.push_back(task.phase);

  for (const auto& phase_name : phase_order) {
    Json phase{{"name", phase_name}, {"tasks", Json::array()}};
    for (const auto& task : tasks) {
      if (task.phase != phase_name) continue;
      Json rois = Json::array();
      for (int r = 0; r < task.n_rois; ++r)
        rois.push_back(Json{{"roi_id", r == 0 ? "organ" : "lesion"},
                            {"label_value", r + 1},
                            {"nsd_tolerance_mm", r == 0 ? 2.0 : 1.5}});
      Json cases = Json::array();
      for (int c = 0; c < task.n_cases; ++c) cases.push_back(case_name(c));
      phase["tasks"].push_back(Json{{"task_id", task.task_id},
                                    {"gt_dir", "gt/" + task.task_id},
                                    {"rois", rois},
                                    {"cases", cases}});

      for (int c = 0; c < task.n_cases; ++c) {
        const segrank::LabelVolume gt = case_volume(task, c, 0);
        const bool big_endian = task.task_id == tasks.back().task_id && c == 2;
        write_case_file(gt, root / "gt" / task.task_id, case_name(c), c,
                        big_endian);
        for (const auto& algo : algorithms) {
          const segrank::LabelVolume pred = case_volume(task, c, algo.shift);
          write_case_file(pred,
                          root / "submissions" / algo.name / task.task_id,
                          case_name(c), c + algo.shift);
        }
      }
    }
    phases.push_back(std::move(phase));
  }

  Json algos = Json::array();
  for (const auto& algo : algorithms) {
    Json predictions;
    for (const auto& task : tasks)
      predictions[task.task_id] = "submissions/" + algo.name + "/" + task.task_id;
    algos.push_back(Json{{"name", algo.name}, {"predictions", predictions}});
  }

  const Json manifest{
      {"phases", phases},
      {"algorithms", algos},
      {"ranking",
       {{"alpha", 0.05},
        {"variants", {"significance", "mean_then_rank", "median_then_rank",
                      "rank_then_mean"}}}},
      {"bootstrap",
       {{"n_samples", bootstrap_samples}, {"seed", bootstrap_seed}}},
  };
  const fs::path manifest_path = root / "challenge.json";
  segrank::write_text_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

}  // namespace fixtures
