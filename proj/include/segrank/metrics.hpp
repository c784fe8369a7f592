#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "segrank/nifti.hpp"

namespace segrank {

struct RoiSpec {
  std::string roi_id;
  std::int32_t label_value = 1;
  double nsd_tolerance_mm = 1.0;
};

struct Mask {
  std::array<int, 3> extents{};
  std::array<double, 3> spacing{};
  std::vector<std::uint8_t> voxels;  // 0 or 1, x-fastest

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(extents[0]) * extents[1] * extents[2];
  }
  std::size_t index(int x, int y, int z) const {
    return (static_cast<std::size_t>(z) * extents[1] + y) * extents[0] + x;
  }
  bool at(int x, int y, int z) const { return voxels[index(x, y, z)] != 0; }
};

struct MetricValue {
  double value = 0.0;
  bool undefined_substituted = false;
};

struct CaseMetricRecord {
  std::string case_id;
  std::string roi_id;
  double dsc = 0.0;
  double nsd = 0.0;
  bool gt_empty = false;
  bool pred_empty = false;
  bool dsc_undefined = false;
  bool nsd_undefined = false;
};

Mask binary_mask(const LabelVolume& volume, std::int32_t label_value);

// 2|G∩P| / (|G|+|P|); both empty -> 0 with the undefined flag.
MetricValue dice(const Mask& gt, const Mask& pred);

// Foreground voxels with at least one 6-neighbor that is background or
// outside the grid. Coordinates ordered by (z, y, x).
std::vector<std::array<int, 3>> extract_surface(const Mask& mask);

// Squared Euclidean distance (mm^2) from every `from` voxel to its nearest
// `to` voxel, in physical coordinates index*spacing per axis. Exact, via a
// separable lower-envelope distance transform over the joint bounding box.
std::vector<double> nearest_squared_distances(
    std::span<const std::array<int, 3>> from,
    std::span<const std::array<int, 3>> to, const std::array<double, 3>& spacing);

// Euclidean distances in mm; errors if `to` is empty.
std::vector<double> surface_distances(std::span<const std::array<int, 3>> from,
                                      std::span<const std::array<int, 3>> to,
                                      const std::array<double, 3>& spacing);

// Fraction of surface voxels of each mask lying within tolerance of the
// other mask's surface, symmetrized. Comparisons run on squared distances
// against tolerance^2 so boundary classification is deterministic. Both
// surfaces empty -> 0 flagged undefined; exactly one empty -> plain 0.
MetricValue nsd(const Mask& gt, const Mask& pred, double tolerance_mm);

std::vector<CaseMetricRecord> evaluate_case(const LabelVolume& gt,
                                            const LabelVolume& pred,
                                            std::span<const RoiSpec> rois,
                                            const std::string& case_id);

}  // namespace segrank
