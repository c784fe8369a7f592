#include "segrank/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>

#include "segrank/error.hpp"
#include "segrank/serialize.hpp"
#include "segrank/stats.hpp"

namespace segrank {

BoxplotStats boxplot_stats(std::span<const double> values) {
  if (values.empty()) fail(Errc::empty_input, "boxplot of empty list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxplotStats s;
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  const double iqr = s.q3 - s.q1;
  const double fence_low = s.q1 - 1.5 * iqr;
  const double fence_high = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q3;
  s.whisker_high = s.q1;
  bool any_in = false;
  for (double x : v) {
    if (x >= fence_low && x <= fence_high) {
      if (!any_in) {
        s.whisker_low = x;
        any_in = true;
      }
      s.whisker_high = x;
    } else {
      s.outliers.push_back(x);
    }
  }
  if (!any_in) {
    // Quartiles are interpolated, so at least the median always sits inside
    // the fences; guard anyway.
    s.whisker_low = s.q1;
    s.whisker_high = s.q3;
  }
  return s;
}

namespace {

// 10-color palette shared by every plot; algorithms, ROIs, phases and tasks
// index into it modulo its size.
constexpr const char* kPalette[] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc949", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
constexpr int kPaletteSize = 10;

const char* color(std::size_t i) { return kPalette[i % kPaletteSize]; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Svg {
  std::string body;
  double width, height;

  Svg(double w, double h) : width(w), height(h) {}

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& cls = "", const std::string& stroke = "") {
    body += "<rect";
    if (!cls.empty()) body += " class=\"" + cls + "\"";
    body += " x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
            "\" height=\"" + fmt(h) + "\" fill=\"" + fill + "\"";
    if (!stroke.empty()) body += " stroke=\"" + stroke + "\"";
    body += "/>\n";
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, const std::string& cls = "",
            double stroke_width = 1.0) {
    body += "<line";
    if (!cls.empty()) body += " class=\"" + cls + "\"";
    body += " x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
            "\" y2=\"" + fmt(y2) + "\" stroke=\"" + stroke +
            "\" stroke-width=\"" + fmt(stroke_width) + "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& cls = "", double opacity = 1.0) {
    body += "<circle";
    if (!cls.empty()) body += " class=\"" + cls + "\"";
    body += " cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(r) +
            "\" fill=\"" + fill + "\"";
    if (opacity != 1.0) body += " fill-opacity=\"" + fmt(opacity) + "\"";
    body += "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke, const std::string& cls = "",
                double stroke_width = 2.0) {
    body += "<polyline";
    if (!cls.empty()) body += " class=\"" + cls + "\"";
    body += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body += ' ';
      body += fmt(pts[i].first) + "," + fmt(pts[i].second);
    }
    body += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
            fmt(stroke_width) + "\"/>\n";
  }

  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start",
            const std::string& transform = "") {
    body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" +
            fmt(size) + "\" font-family=\"sans-serif\" text-anchor=\"" +
            anchor + "\"";
    if (!transform.empty()) body += " transform=\"" + transform + "\"";
    body += ">" + xml_escape(s) + "</text>\n";
  }

  std::string finish() const {
    std::string out =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
        fmt(width) + "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " +
        fmt(width) + " " + fmt(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" fill=\"#ffffff\"/>\n";
    out += body;
    out += "</svg>\n";
    return out;
  }
};

void draw_vertical_box(Svg& svg, double cx, double half_width,
                       const BoxplotStats& s,
                       const std::function<double(double)>& yscale,
                       const std::string& fill) {
  svg.line(cx, yscale(s.whisker_low), cx, yscale(s.q1), "#333333", "whisker");
  svg.line(cx, yscale(s.q3), cx, yscale(s.whisker_high), "#333333", "whisker");
  svg.line(cx - half_width * 0.6, yscale(s.whisker_low), cx + half_width * 0.6,
           yscale(s.whisker_low), "#333333", "whisker");
  svg.line(cx - half_width * 0.6, yscale(s.whisker_high), cx + half_width * 0.6,
           yscale(s.whisker_high), "#333333", "whisker");
  svg.rect(cx - half_width, yscale(s.q3), 2 * half_width,
           yscale(s.q1) - yscale(s.q3), fill, "box", "#333333");
  svg.line(cx - half_width, yscale(s.median), cx + half_width, yscale(s.median),
           "#000000", "median", 2.0);
  for (double o : s.outliers)
    svg.circle(cx, yscale(o), 2.5, "#333333", "outlier");
}

void draw_horizontal_box(Svg& svg, double cy, double half_height,
                         const BoxplotStats& s,
                         const std::function<double(double)>& xscale,
                         const std::string& fill) {
  svg.line(xscale(s.whisker_low), cy, xscale(s.q1), cy, "#333333", "whisker");
  svg.line(xscale(s.q3), cy, xscale(s.whisker_high), cy, "#333333", "whisker");
  svg.line(xscale(s.whisker_low), cy - half_height * 0.6, xscale(s.whisker_low),
           cy + half_height * 0.6, "#333333", "whisker");
  svg.line(xscale(s.whisker_high), cy - half_height * 0.6,
           xscale(s.whisker_high), cy + half_height * 0.6, "#333333", "whisker");
  svg.rect(xscale(s.q1), cy - half_height, xscale(s.q3) - xscale(s.q1),
           2 * half_height, fill, "box", "#333333");
  svg.line(xscale(s.median), cy - half_height, xscale(s.median),
           cy + half_height, "#000000", "median", 2.0);
  for (double o : s.outliers)
    svg.circle(xscale(o), cy, 2.5, "#333333", "outlier");
}

}  // namespace

std::string render_dsc_boxplot(const std::string& task_id,
                               std::span<const BoxGroupSeries> series) {
  if (series.empty()) fail(Errc::empty_input, "boxplot needs series");
  const double margin_l = 60, margin_r = 150, margin_t = 50, margin_b = 90;
  const double plot_w = std::max<double>(320.0, 64.0 * series.size());
  const double plot_h = 360;
  Svg svg(margin_l + plot_w + margin_r, margin_t + plot_h + margin_b);

  auto yscale = [&](double v) { return margin_t + plot_h * (1.0 - v); };

  svg.text(margin_l, margin_t - 20, "DSC per algorithm: " + task_id, 15.0);
  for (int t = 0; t <= 4; ++t) {
    const double v = t * 0.25;
    svg.line(margin_l, yscale(v), margin_l + plot_w, yscale(v), "#dddddd",
             "grid");
    svg.text(margin_l - 8, yscale(v) + 4, fmt(v), 11.0, "end");
  }
  svg.line(margin_l, yscale(0), margin_l + plot_w, yscale(0), "#333333", "axis");
  svg.line(margin_l, yscale(1), margin_l, yscale(0), "#333333", "axis");

  std::size_t n_rois = 0;
  for (const auto& g : series) n_rois = std::max(n_rois, g.roi_values.size());
  const double group_w = plot_w / static_cast<double>(series.size());
  const double slot_w = group_w / static_cast<double>(std::max<std::size_t>(n_rois, 1));

  for (std::size_t a = 0; a < series.size(); ++a) {
    const double gx = margin_l + group_w * static_cast<double>(a);
    for (std::size_t r = 0; r < series[a].roi_values.size(); ++r) {
      const auto& [roi, values] = series[a].roi_values[r];
      if (values.empty()) {
        std::cerr << "warning: no values for algorithm '" << series[a].algorithm
                  << "' roi '" << roi << "', box omitted\n";
        continue;
      }
      const double cx = gx + slot_w * (static_cast<double>(r) + 0.5);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double dx = (static_cast<double>(i % 5) - 2.0) * 2.5;
        svg.circle(cx + dx, yscale(values[i]), 2.0, color(r), "dot", 0.35);
      }
      draw_vertical_box(svg, cx, std::min(slot_w * 0.3, 14.0),
                        boxplot_stats(values), yscale, color(r));
    }
    svg.text(gx + group_w / 2, margin_t + plot_h + 14, series[a].algorithm,
             10.0, "end",
             "rotate(-35 " + fmt(gx + group_w / 2) + " " +
                 fmt(margin_t + plot_h + 14) + ")");
  }

  // ROI legend from the first group that names each slot.
  double ly = margin_t;
  for (std::size_t r = 0; r < n_rois; ++r) {
    std::string name;
    for (const auto& g : series)
      if (r < g.roi_values.size()) {
        name = g.roi_values[r].first;
        break;
      }
    svg.rect(margin_l + plot_w + 20, ly, 12, 12, color(r), "legend");
    svg.text(margin_l + plot_w + 38, ly + 10, name, 11.0);
    ly += 20;
  }
  return svg.finish();
}

std::string boxplot_stats_csv(std::span<const BoxGroupSeries> series) {
  std::string out =
      "algorithm,roi,n,median,q1,q3,whisker_low,whisker_high,outliers\n";
  for (const auto& g : series) {
    for (const auto& [roi, values] : g.roi_values) {
      if (values.empty()) continue;
      BoxplotStats s = boxplot_stats(values);
      out += csv_field(g.algorithm);
      out += ',';
      out += csv_field(roi);
      out += ',';
      out += std::to_string(values.size());
      out += ',';
      out += format_double(s.median);
      out += ',';
      out += format_double(s.q1);
      out += ',';
      out += format_double(s.q3);
      out += ',';
      out += format_double(s.whisker_low);
      out += ',';
      out += format_double(s.whisker_high);
      out += ',';
      std::string joined;
      for (double o : s.outliers) {
        if (!joined.empty()) joined += ';';
        joined += format_double(o);
      }
      out += csv_field(joined);
      out += '\n';
    }
  }
  return out;
}

std::string render_rank_boxplot(std::span<const RankDistribution> dists,
                                double max_rank) {
  if (dists.empty()) fail(Errc::empty_input, "rank boxplot needs algorithms");
  std::size_t n_phases = 0;
  for (const auto& d : dists) n_phases = std::max(n_phases, d.phase_ranks.size());

  const double margin_l = 150, margin_r = 150, margin_t = 50, margin_b = 50;
  const double row_h = 18.0 * static_cast<double>(std::max<std::size_t>(n_phases, 1));
  const double plot_h = row_h * static_cast<double>(dists.size());
  const double plot_w = 520;
  Svg svg(margin_l + plot_w + margin_r, margin_t + plot_h + margin_b);

  const double lo = 1.0, hi = std::max(max_rank, 2.0);
  auto xscale = [&](double v) {
    return margin_l + plot_w * (v - lo) / (hi - lo);
  };

  svg.text(margin_l, margin_t - 20, "Rank distribution per algorithm", 15.0);
  const int tick_step = hi > 12 ? 2 : 1;
  for (int t = 1; t <= static_cast<int>(hi); t += tick_step) {
    svg.line(xscale(t), margin_t, xscale(t), margin_t + plot_h, "#dddddd",
             "grid");
    svg.text(xscale(t), margin_t + plot_h + 16, std::to_string(t), 11.0,
             "middle");
  }
  svg.line(margin_l, margin_t + plot_h, margin_l + plot_w, margin_t + plot_h,
           "#333333", "axis");

  for (std::size_t a = 0; a < dists.size(); ++a) {
    const double gy = margin_t + row_h * static_cast<double>(a);
    svg.text(margin_l - 8, gy + row_h / 2 + 4, dists[a].algorithm, 11.0, "end");
    for (std::size_t p = 0; p < dists[a].phase_ranks.size(); ++p) {
      const auto& [phase, ranks] = dists[a].phase_ranks[p];
      if (ranks.empty()) continue;
      const double cy =
          gy + row_h * (static_cast<double>(p) + 0.5) /
                   static_cast<double>(dists[a].phase_ranks.size());
      draw_horizontal_box(svg, cy, 6.0, boxplot_stats(ranks), xscale, color(p));
    }
  }

  double ly = margin_t;
  for (std::size_t p = 0; p < n_phases; ++p) {
    std::string name;
    for (const auto& d : dists)
      if (p < d.phase_ranks.size()) {
        name = d.phase_ranks[p].first;
        break;
      }
    svg.rect(margin_l + plot_w + 20, ly, 12, 12, color(p), "legend");
    svg.text(margin_l + plot_w + 38, ly + 10, name, 11.0);
    ly += 20;
  }
  return svg.finish();
}

std::string render_line_plot(const std::string& task_id,
                             std::span<const std::string> algorithms,
                             std::span<const VariantColumn> columns) {
  if (columns.size() < 2)
    fail(Errc::empty_input, "line plot needs at least two ranking variants");
  if (algorithms.empty()) fail(Errc::empty_input, "line plot needs algorithms");
  for (const auto& c : columns) {
    if (c.ranks.size() != algorithms.size())
      fail(Errc::algorithm_set_mismatch,
           "variant column '" + c.variant + "' does not cover every algorithm");
  }

  const double margin_l = 60, margin_r = 170, margin_t = 50, margin_b = 60;
  const double plot_w = std::max<double>(300.0, 130.0 * (columns.size() - 1));
  const double n = static_cast<double>(algorithms.size());
  const double plot_h = std::max(220.0, 24.0 * n);
  Svg svg(margin_l + plot_w + margin_r, margin_t + plot_h + margin_b);

  auto yscale = [&](double rank) {
    if (n == 1.0) return margin_t + plot_h / 2;
    return margin_t + plot_h * (rank - 1.0) / (n - 1.0);
  };
  auto xscale = [&](std::size_t col) {
    return margin_l +
           plot_w * static_cast<double>(col) /
               static_cast<double>(columns.size() - 1);
  };

  svg.text(margin_l, margin_t - 20, "Ranking variants: " + task_id, 15.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    svg.line(xscale(c), margin_t, xscale(c), margin_t + plot_h, "#dddddd",
             "grid");
    svg.text(xscale(c), margin_t + plot_h + 18, columns[c].variant, 11.0,
             "middle");
  }
  for (int r = 1; r <= static_cast<int>(n); ++r)
    svg.text(margin_l - 8, yscale(r) + 4, std::to_string(r), 11.0, "end");

  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
      pts.emplace_back(xscale(c), yscale(columns[c].ranks[a]));
    svg.polyline(pts, color(a), "line");
    svg.rect(margin_l + plot_w + 20, margin_t + 20.0 * static_cast<double>(a),
             12, 12, color(a), "legend");
    svg.text(margin_l + plot_w + 38, margin_t + 20.0 * static_cast<double>(a) + 10,
             algorithms[a], 11.0);
  }
  return svg.finish();
}

std::string render_stacked_frequency(
    std::span<const BootstrapSummary> summaries) {
  if (summaries.empty()) fail(Errc::empty_input, "no bootstrap summaries");
  const std::vector<std::string>& algos = summaries[0].algorithms;
  for (const auto& s : summaries) {
    if (s.algorithms != algos)
      fail(Errc::algorithm_set_mismatch,
           "bootstrap summaries cover different algorithm sets");
  }

  std::int64_t total_per_algo = 0;
  for (const auto& s : summaries) total_per_algo += s.n_samples;

  const double margin_l = 60, margin_r = 150, margin_t = 50, margin_b = 90;
  const double group_w = 70.0;
  const double plot_w = group_w * static_cast<double>(algos.size());
  const double plot_h = 340;
  Svg svg(margin_l + plot_w + margin_r, margin_t + plot_h + margin_b);

  auto hscale = [&](std::int64_t count) {
    return plot_h * static_cast<double>(count) /
           static_cast<double>(total_per_algo);
  };

  svg.text(margin_l, margin_t - 20, "Bootstrap rank frequencies", 15.0);
  svg.line(margin_l, margin_t + plot_h, margin_l + plot_w, margin_t + plot_h,
           "#333333", "axis");

  for (std::size_t a = 0; a < algos.size(); ++a) {
    const double gx = margin_l + group_w * static_cast<double>(a);

    // Rank slots: the sorted union of ranks this algorithm achieved in any
    // task; each slot holds one stack, one segment per task with mass there.
    std::vector<double> slots;
    for (const auto& s : summaries)
      for (const auto& [rank, count] : s.rank_frequency[a])
        if (count > 0) slots.push_back(rank);
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    if (slots.empty()) continue;

    const double slot_w = (group_w - 10.0) / static_cast<double>(slots.size());
    for (std::size_t si = 0; si < slots.size(); ++si) {
      const double x = gx + 5.0 + slot_w * static_cast<double>(si);
      double y = margin_t + plot_h;
      for (std::size_t t = 0; t < summaries.size(); ++t) {
        auto it = summaries[t].rank_frequency[a].find(slots[si]);
        if (it == summaries[t].rank_frequency[a].end() || it->second == 0)
          continue;
        const double h = hscale(it->second);
        y -= h;
        svg.rect(x, y, slot_w * 0.9, h, color(t), "bar");
      }
      svg.text(x + slot_w * 0.45, margin_t + plot_h + 14, format_double(slots[si]),
               9.0, "middle");
    }
    svg.text(gx + group_w / 2, margin_t + plot_h + 34, algos[a], 10.0, "end",
             "rotate(-35 " + fmt(gx + group_w / 2) + " " +
                 fmt(margin_t + plot_h + 34) + ")");
  }

  double ly = margin_t;
  for (std::size_t t = 0; t < summaries.size(); ++t) {
    svg.rect(margin_l + plot_w + 20, ly, 12, 12, color(t), "legend");
    svg.text(margin_l + plot_w + 38, ly + 10, summaries[t].task_id, 11.0);
    ly += 20;
  }
  return svg.finish();
}

std::filesystem::path resolve_case_file(const std::filesystem::path& dir,
                                        const std::string& case_id) {
  std::filesystem::path plain = dir / (case_id + ".nii");
  if (std::filesystem::exists(plain)) return plain;
  std::filesystem::path gz = dir / (case_id + ".nii.gz");
  if (std::filesystem::exists(gz)) return gz;
  return {};
}

ValidationReport validate_submission(const std::filesystem::path& dir,
                                     const SubmissionManifest& manifest) {
  ValidationReport report;
  report.task_id = manifest.task_id;
  report.valid = true;
  for (const CaseReference& ref : manifest.cases) {
    CaseCheck check;
    check.case_id = ref.case_id;
    std::filesystem::path file = resolve_case_file(dir, ref.case_id);
    if (file.empty()) {
      check.code = "MissingCase";
      check.detail = "no " + ref.case_id + ".nii or .nii.gz under " +
                     dir.string();
      report.valid = false;
      report.cases.push_back(std::move(check));
      continue;
    }
    try {
      LabelVolume vol = load_label_volume(file);
      if (vol.extents != ref.extents) {
        fail(Errc::extent_mismatch,
             "extents " + std::to_string(vol.extents[0]) + "x" +
                 std::to_string(vol.extents[1]) + "x" +
                 std::to_string(vol.extents[2]) + " do not match reference " +
                 std::to_string(ref.extents[0]) + "x" +
                 std::to_string(ref.extents[1]) + "x" +
                 std::to_string(ref.extents[2]));
      }
      if (!same_spacing(vol.spacing, ref.spacing)) {
        fail(Errc::spacing_mismatch,
             "voxel spacing does not match the reference grid");
      }
      for (std::int32_t v : vol.labels) {
        if (v != 0 && !manifest.legal_labels.count(v)) {
          check.code = "IllegalLabel";
          check.detail = "label " + std::to_string(v) +
                         " is not in the task's legal set";
          break;
        }
      }
      if (check.code.empty()) check.ok = true;
    } catch (const Error& e) {
      check.code = errc_name(e.code());
      check.detail = e.what();
    }
    if (!check.ok) report.valid = false;
    report.cases.push_back(std::move(check));
  }
  return report;
}

}  // namespace segrank
