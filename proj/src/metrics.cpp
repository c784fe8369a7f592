#include "segrank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segrank/error.hpp"

namespace segrank {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_extents(const Mask& a, const Mask& b) {
  if (a.extents != b.extents) {
    fail(Errc::extent_mismatch,
         "grids differ: " + std::to_string(a.extents[0]) + "x" +
             std::to_string(a.extents[1]) + "x" + std::to_string(a.extents[2]) +
             " vs " + std::to_string(b.extents[0]) + "x" +
             std::to_string(b.extents[1]) + "x" + std::to_string(b.extents[2]));
  }
}

// Lower-envelope pass for one line of sampled squared distances. pos[] holds
// strictly increasing physical coordinates; f[] the current squared
// distances (kInf where no site contributes yet). Parabola heights are
// evaluated as (pos[q]-pos[v])^2 + f[v], the same expression a direct
// all-pairs computation uses, so exact inputs stay exact.
struct EnvelopeBuffers {
  std::vector<double> f, out, z, fv;
  std::vector<int> v;
  void ensure(int n) {
    if (static_cast<int>(f.size()) < n) {
      f.resize(n);
      out.resize(n);
      z.resize(n + 1);
      fv.resize(n);
      v.resize(n);
    }
  }
};

void envelope_line(const double* f, double* out, const double* pos, int n,
                   EnvelopeBuffers& buf) {
  int k = -1;
  double s = 0.0;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double pq = pos[q];
    while (k >= 0) {
      const double pv = pos[buf.v[k]];
      s = ((f[q] + pq * pq) - (buf.fv[k] + pv * pv)) / (2.0 * (pq - pv));
      if (s <= buf.z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    buf.v[k] = q;
    buf.fv[k] = f[q];
    buf.z[k] = (k == 0) ? -kInf : s;
  }
  if (k < 0) {
    std::fill(out, out + n, kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (j < k && buf.z[j + 1] < pos[q]) ++j;
    const double d = pos[q] - pos[buf.v[j]];
    out[q] = d * d + buf.fv[j];
  }
}

}  // namespace

Mask binary_mask(const LabelVolume& volume, std::int32_t label_value) {
  Mask m;
  m.extents = volume.extents;
  m.spacing = volume.spacing;
  m.voxels.resize(volume.labels.size());
  const std::size_t n = volume.labels.size();
  for (std::size_t i = 0; i < n; ++i)
    m.voxels[i] = volume.labels[i] == label_value ? 1 : 0;
  return m;
}

MetricValue dice(const Mask& gt, const Mask& pred) {
  check_extents(gt, pred);
  const std::size_t n = gt.voxels.size();
  std::int64_t g = 0, p = 0, both = 0;
  for (std::size_t i = 0; i < n; ++i) {
    g += gt.voxels[i];
    p += pred.voxels[i];
    both += gt.voxels[i] & pred.voxels[i];
  }
  if (g + p == 0) return {0.0, true};
  return {2.0 * static_cast<double>(both) / static_cast<double>(g + p), false};
}

std::vector<std::array<int, 3>> extract_surface(const Mask& mask) {
  std::vector<std::array<int, 3>> surface;
  const int nx = mask.extents[0], ny = mask.extents[1], nz = mask.extents[2];
  const std::uint8_t* v = mask.voxels.data();
  const std::size_t sy = static_cast<std::size_t>(nx);
  const std::size_t sz = static_cast<std::size_t>(nx) * ny;
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      const std::size_t row = static_cast<std::size_t>(z) * sz +
                              static_cast<std::size_t>(y) * sy;
      const bool yz_border = y == 0 || y == ny - 1 || z == 0 || z == nz - 1;
      for (int x = 0; x < nx; ++x) {
        const std::size_t i = row + static_cast<std::size_t>(x);
        if (!v[i]) continue;
        // An out-of-grid neighbor counts as background, so any foreground
        // voxel on the grid border is surface.
        if (yz_border || x == 0 || x == nx - 1 || !v[i - 1] || !v[i + 1] ||
            !v[i - sy] || !v[i + sy] || !v[i - sz] || !v[i + sz]) {
          surface.push_back({x, y, z});
        }
      }
    }
  }
  return surface;
}

std::vector<double> nearest_squared_distances(
    std::span<const std::array<int, 3>> from,
    std::span<const std::array<int, 3>> to,
    const std::array<double, 3>& spacing) {
  if (to.empty())
    fail(Errc::empty_target_surface, "nearest-distance target set is empty");
  if (from.empty()) return {};

  int lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::numeric_limits<int>::max();
    hi[a] = std::numeric_limits<int>::min();
  }
  auto grow = [&](const std::array<int, 3>& p) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  };
  for (const auto& p : from) grow(p);
  for (const auto& p : to) grow(p);

  const int bx = hi[0] - lo[0] + 1;
  const int by = hi[1] - lo[1] + 1;
  const int bz = hi[2] - lo[2] + 1;
  const std::size_t plane = static_cast<std::size_t>(bx) * by;
  const std::size_t total = plane * static_cast<std::size_t>(bz);

  // Physical coordinate of absolute index i along axis a is i*spacing[a];
  // precomputed per box column so every distance term is the identical
  // floating-point expression everywhere.
  std::vector<double> pos_x(bx), pos_y(by), pos_z(bz);
  for (int i = 0; i < bx; ++i) pos_x[i] = (lo[0] + i) * spacing[0];
  for (int i = 0; i < by; ++i) pos_y[i] = (lo[1] + i) * spacing[1];
  for (int i = 0; i < bz; ++i) pos_z[i] = (lo[2] + i) * spacing[2];

  std::vector<std::uint8_t> site(total, 0);
  for (const auto& p : to) {
    site[(static_cast<std::size_t>(p[2] - lo[2]) * by + (p[1] - lo[1])) * bx +
         (p[0] - lo[0])] = 1;
  }

  std::vector<double> field(total);

  // Pass 1, along x: squared distance to the nearest site in the row.
  std::vector<int> left(bx), right(bx);
  for (std::size_t row = 0; row < total / bx; ++row) {
    const std::uint8_t* srow = site.data() + row * bx;
    double* frow = field.data() + row * bx;
    int last = -1;
    for (int x = 0; x < bx; ++x) {
      if (srow[x]) last = x;
      left[x] = last;
    }
    last = -1;
    for (int x = bx - 1; x >= 0; --x) {
      if (srow[x]) last = x;
      right[x] = last;
    }
    for (int x = 0; x < bx; ++x) {
      double best = kInf;
      if (left[x] >= 0) {
        const double d = pos_x[x] - pos_x[left[x]];
        best = d * d;
      }
      if (right[x] >= 0) {
        const double d = pos_x[right[x]] - pos_x[x];
        const double v = d * d;
        if (v < best) best = v;
      }
      frow[x] = best;
    }
  }

  EnvelopeBuffers buf;
  buf.ensure(std::max(by, bz));

  // Pass 2, along y.
  for (int z = 0; z < bz; ++z) {
    for (int x = 0; x < bx; ++x) {
      double* base = field.data() + static_cast<std::size_t>(z) * plane + x;
      for (int y = 0; y < by; ++y) buf.f[y] = base[static_cast<std::size_t>(y) * bx];
      envelope_line(buf.f.data(), buf.out.data(), pos_y.data(), by, buf);
      for (int y = 0; y < by; ++y) base[static_cast<std::size_t>(y) * bx] = buf.out[y];
    }
  }

  // Pass 3, along z.
  for (int y = 0; y < by; ++y) {
    for (int x = 0; x < bx; ++x) {
      double* base = field.data() + static_cast<std::size_t>(y) * bx + x;
      for (int z = 0; z < bz; ++z) buf.f[z] = base[static_cast<std::size_t>(z) * plane];
      envelope_line(buf.f.data(), buf.out.data(), pos_z.data(), bz, buf);
      for (int z = 0; z < bz; ++z) base[static_cast<std::size_t>(z) * plane] = buf.out[z];
    }
  }

  std::vector<double> result;
  result.reserve(from.size());
  for (const auto& p : from) {
    result.push_back(
        field[(static_cast<std::size_t>(p[2] - lo[2]) * by + (p[1] - lo[1])) * bx +
              (p[0] - lo[0])]);
  }
  return result;
}

std::vector<double> surface_distances(std::span<const std::array<int, 3>> from,
                                      std::span<const std::array<int, 3>> to,
                                      const std::array<double, 3>& spacing) {
  std::vector<double> sq = nearest_squared_distances(from, to, spacing);
  for (double& d : sq) d = std::sqrt(d);
  return sq;
}

MetricValue nsd(const Mask& gt, const Mask& pred, double tolerance_mm) {
  check_extents(gt, pred);
  if (!same_spacing(gt.spacing, pred.spacing)) {
    fail(Errc::spacing_mismatch, "voxel spacings differ beyond 1e-6 relative");
  }
  std::vector<std::array<int, 3>> sg = extract_surface(gt);
  std::vector<std::array<int, 3>> sp = extract_surface(pred);
  if (sg.empty() && sp.empty()) return {0.0, true};
  if (sg.empty() || sp.empty()) return {0.0, false};

  const double tol_sq = tolerance_mm * tolerance_mm;
  std::int64_t close = 0;
  for (double d : nearest_squared_distances(sg, sp, gt.spacing))
    if (d <= tol_sq) ++close;
  for (double d : nearest_squared_distances(sp, sg, gt.spacing))
    if (d <= tol_sq) ++close;
  return {static_cast<double>(close) /
              static_cast<double>(sg.size() + sp.size()),
          false};
}

std::vector<CaseMetricRecord> evaluate_case(const LabelVolume& gt,
                                            const LabelVolume& pred,
                                            std::span<const RoiSpec> rois,
                                            const std::string& case_id) {
  if (!same_grid(gt, pred)) {
    fail(Errc::extent_mismatch,
         "prediction grid does not match ground truth for case " + case_id +
             " (" + pred.source + ")");
  }
  if (!same_spacing(gt.spacing, pred.spacing)) {
    fail(Errc::spacing_mismatch,
         "prediction spacing does not match ground truth for case " + case_id +
             " (" + pred.source + ")");
  }
  std::vector<CaseMetricRecord> records;
  records.reserve(rois.size());
  for (const RoiSpec& roi : rois) {
    Mask g = binary_mask(gt, roi.label_value);
    Mask p = binary_mask(pred, roi.label_value);
    MetricValue d = dice(g, p);
    MetricValue s = nsd(g, p, roi.nsd_tolerance_mm);
    CaseMetricRecord rec;
    rec.case_id = case_id;
    rec.roi_id = roi.roi_id;
    rec.dsc = d.value;
    rec.nsd = s.value;
    rec.dsc_undefined = d.undefined_substituted;
    rec.nsd_undefined = s.undefined_substituted;
    rec.gt_empty = std::none_of(g.voxels.begin(), g.voxels.end(),
                                [](std::uint8_t v) { return v != 0; });
    rec.pred_empty = std::none_of(p.voxels.begin(), p.voxels.end(),
                                  [](std::uint8_t v) { return v != 0; });
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace segrank
