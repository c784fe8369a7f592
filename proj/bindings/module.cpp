#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "segrank/error.hpp"
#include "segrank/metrics.hpp"
#include "segrank/nifti.hpp"
#include "segrank/ranking.hpp"
#include "segrank/report.hpp"
#include "segrank/stability.hpp"

namespace py = pybind11;
using namespace segrank;

namespace {

using IntArray =
    py::array_t<std::int32_t, py::array::f_style | py::array::forcecast>;

std::array<double, 3> to_spacing(const std::vector<double>& s) {
  if (s.size() != 3) fail(Errc::invalid_spacing, "spacing needs 3 components");
  return {s[0], s[1], s[2]};
}

LabelVolume volume_from_array(const IntArray& labels,
                              const std::vector<double>& spacing) {
  if (labels.ndim() != 3)
    fail(Errc::dimension_mismatch, "expected a 3D label array");
  LabelVolume v;
  v.extents = {static_cast<int>(labels.shape(0)),
               static_cast<int>(labels.shape(1)),
               static_cast<int>(labels.shape(2))};
  v.spacing = to_spacing(spacing);
  v.source = "<ndarray>";
  const std::int32_t* data = labels.data();
  v.labels.assign(data, data + labels.size());
  for (std::int32_t x : v.labels)
    if (x < 0) fail(Errc::negative_label, "labels must be non-negative");
  return v;
}

Mask mask_from_array(const IntArray& arr, const std::vector<double>& spacing) {
  if (arr.ndim() != 3) fail(Errc::dimension_mismatch, "expected a 3D array");
  Mask m;
  m.extents = {static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
               static_cast<int>(arr.shape(2))};
  m.spacing = to_spacing(spacing);
  const std::int32_t* data = arr.data();
  m.voxels.resize(static_cast<std::size_t>(arr.size()));
  for (py::ssize_t i = 0; i < arr.size(); ++i)
    m.voxels[static_cast<std::size_t>(i)] = data[i] != 0 ? 1 : 0;
  return m;
}

py::array labels_to_array(const LabelVolume& v) {
  // Fortran strides: the flat buffer is x-fastest.
  const std::array<py::ssize_t, 3> shape = {v.extents[0], v.extents[1],
                                            v.extents[2]};
  const py::ssize_t item = static_cast<py::ssize_t>(sizeof(std::int32_t));
  const std::array<py::ssize_t, 3> strides = {
      item, item * v.extents[0],
      item * v.extents[0] * static_cast<py::ssize_t>(v.extents[1])};
  return py::array(py::dtype::of<std::int32_t>(), shape, strides,
                   v.labels.data());
}

RankingTable ranking_from_ranks(const std::vector<double>& ranks) {
  RankingTable t;
  t.ranks = ranks;
  t.scores = ranks;
  for (std::size_t i = 0; i < ranks.size(); ++i)
    t.algorithms.push_back("a" + std::to_string(i));
  return t;
}

CaseMetricTable table_from_matrix(
    const py::array_t<double, py::array::c_style | py::array::forcecast>&
        values) {
  if (values.ndim() != 2)
    fail(Errc::dimension_mismatch,
         "expected a 2D (algorithms x cases) value matrix");
  CaseMetricTable t;
  t.task_id = "<matrix>";
  const int na = static_cast<int>(values.shape(0));
  const int nc = static_cast<int>(values.shape(1));
  for (int a = 0; a < na; ++a) t.algorithms.push_back("a" + std::to_string(a));
  for (int c = 0; c < nc; ++c) t.case_ids.push_back("c" + std::to_string(c));
  t.roi_ids.push_back("roi");
  t.allocate();
  auto v = values.unchecked<2>();
  for (int a = 0; a < na; ++a)
    for (int c = 0; c < nc; ++c)
      for (int m = 0; m < CaseMetricTable::kMetricCount; ++m)
        t.at(a, c, 0, m) = v(a, c);
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "segmentation challenge metrics and ranking core";

  py::register_exception<Error>(m, "EngineError");

  m.def(
      "load_volume",
      [](const std::string& path) {
        LabelVolume v = load_label_volume(path);
        return py::make_tuple(
            labels_to_array(v),
            py::make_tuple(v.spacing[0], v.spacing[1], v.spacing[2]));
      },
      py::arg("path"),
      "Read a .nii/.nii.gz label volume; returns (labels, spacing).");

  m.def(
      "write_volume",
      [](const std::string& path, const IntArray& labels,
         const std::vector<double>& spacing, const std::string& datatype) {
        LabelVolume v = volume_from_array(labels, spacing);
        write_volume_file(v, path, parse_datatype(datatype));
      },
      py::arg("path"), py::arg("labels"), py::arg("spacing"),
      py::arg("datatype") = "uint16",
      "Write a label volume; gzip-compresses when path ends in .gz.");

  m.def(
      "dice",
      [](const IntArray& gt, const IntArray& pred) {
        const std::vector<double> unit{1.0, 1.0, 1.0};
        MetricValue r = dice(mask_from_array(gt, unit),
                             mask_from_array(pred, unit));
        return py::make_tuple(r.value, r.undefined_substituted);
      },
      py::arg("gt"), py::arg("pred"),
      "Dice overlap of the nonzero voxels; returns (value, undefined).");

  m.def(
      "nsd",
      [](const IntArray& gt, const IntArray& pred,
         const std::vector<double>& spacing, double tolerance_mm) {
        MetricValue r = nsd(mask_from_array(gt, spacing),
                            mask_from_array(pred, spacing), tolerance_mm);
        return py::make_tuple(r.value, r.undefined_substituted);
      },
      py::arg("gt"), py::arg("pred"), py::arg("spacing"),
      py::arg("tolerance_mm") = 1.0,
      "Surface overlap within tolerance; returns (value, undefined).");

  m.def(
      "evaluate_case",
      [](const IntArray& gt, const IntArray& pred,
         const std::vector<double>& spacing,
         const std::vector<std::tuple<std::string, std::int32_t, double>>&
             rois) {
        LabelVolume g = volume_from_array(gt, spacing);
        LabelVolume p = volume_from_array(pred, spacing);
        std::vector<RoiSpec> specs;
        for (const auto& [id, label, tol] : rois)
          specs.push_back({id, label, tol});
        py::list out;
        for (const CaseMetricRecord& r :
             evaluate_case(g, p, specs, "<case>")) {
          py::dict d;
          d["roi"] = r.roi_id;
          d["dsc"] = r.dsc;
          d["nsd"] = r.nsd;
          d["gt_empty"] = r.gt_empty;
          d["pred_empty"] = r.pred_empty;
          d["dsc_undefined"] = r.dsc_undefined;
          d["nsd_undefined"] = r.nsd_undefined;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("gt"), py::arg("pred"), py::arg("spacing"), py::arg("rois"),
      "Both metrics for every (roi_id, label_value, nsd_tolerance_mm).");

  m.def(
      "wilcoxon",
      [](const std::vector<double>& diffs, double alpha) {
        WilcoxonResult r = wilcoxon_one_sided(diffs, alpha);
        return py::make_tuple(r.p_value, r.significant);
      },
      py::arg("diffs"), py::arg("alpha") = 0.05,
      "One-sided signed-rank test; returns (p_value, significant).");

  m.def(
      "rank_from_scores",
      [](const std::vector<double>& scores, bool higher_is_better) {
        return rank_from_scores(scores, higher_is_better);
      },
      py::arg("scores"), py::arg("higher_is_better") = true,
      "Fractional mid-ranks, rank 1 best.");

  m.def(
      "rank_table",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>&
             values,
         const std::string& variant, double alpha) {
        CaseMetricTable t = table_from_matrix(values);
        RankingTable r =
            variant_ranking(t, parse_variant(variant), 0, 0, alpha);
        return py::make_tuple(r.scores, r.ranks);
      },
      py::arg("values"), py::arg("variant") = "significance",
      py::arg("alpha") = 0.05,
      "Rank an (algorithms x cases) matrix; returns (scores, ranks).");

  m.def(
      "kendall_tau",
      [](const std::vector<double>& r1, const std::vector<double>& r2) {
        return kendall_tau(ranking_from_ranks(r1), ranking_from_ranks(r2));
      },
      py::arg("ranks1"), py::arg("ranks2"),
      "Tie-corrected rank correlation of two fractional rank vectors.");

  m.def(
      "boxplot_stats",
      [](const std::vector<double>& values) {
        BoxplotStats s = boxplot_stats(values);
        py::dict d;
        d["median"] = s.median;
        d["q1"] = s.q1;
        d["q3"] = s.q3;
        d["whisker_low"] = s.whisker_low;
        d["whisker_high"] = s.whisker_high;
        d["outliers"] = s.outliers;
        return d;
      },
      py::arg("values"),
      "Quartiles, Tukey whiskers and outliers of a value list.");
}
