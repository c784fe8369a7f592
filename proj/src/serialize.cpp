#include "segrank/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "segrank/error.hpp"

namespace segrank {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(Errc::io_error, "write failed: " + path.string());
}

namespace {

std::string join_flags(bool gt_empty, bool pred_empty, bool undefined) {
  std::string s;
  auto add = [&](const char* f) {
    if (!s.empty()) s += ';';
    s += f;
  };
  if (gt_empty) add("gt_empty");
  if (pred_empty) add("pred_empty");
  if (undefined) add("undefined_substituted");
  return s;
}

// Splits one CSV line honoring double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
    ++i;
  }
  if (quoted) fail(Errc::incomplete_table, "unterminated quote in " + source);
  fields.push_back(cur);
  return fields;
}

double parse_value(const std::string& s, const std::string& source) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(Errc::invalid_metric_value, "bad numeric value '" + s + "' in " + source);
  return v;
}

}  // namespace

std::vector<MetricRow> metric_rows(const std::string& task,
                                   const std::string& algorithm,
                                   std::span<const CaseMetricRecord> records) {
  std::vector<MetricRow> rows;
  rows.reserve(records.size() * 2);
  for (const CaseMetricRecord& r : records) {
    rows.push_back({task, algorithm, r.case_id, r.roi_id, "DSC", r.dsc,
                    join_flags(r.gt_empty, r.pred_empty, r.dsc_undefined)});
    rows.push_back({task, algorithm, r.case_id, r.roi_id, "NSD", r.nsd,
                    join_flags(r.gt_empty, r.pred_empty, r.nsd_undefined)});
  }
  return rows;
}

std::string metrics_csv(std::span<const MetricRow> rows) {
  std::string out = "task,algorithm,case,roi,metric,value,flag\n";
  for (const MetricRow& r : rows) {
    out += csv_field(r.task);
    out += ',';
    out += csv_field(r.algorithm);
    out += ',';
    out += csv_field(r.case_id);
    out += ',';
    out += csv_field(r.roi);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += csv_field(r.flag);
    out += '\n';
  }
  return out;
}

std::vector<MetricRow> parse_metrics_csv(const std::string& text,
                                         const std::string& source) {
  std::vector<MetricRow> rows;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != "task,algorithm,case,roi,metric,value,flag")
        fail(Errc::incomplete_table, "unexpected metrics CSV header in " + source);
      continue;
    }
    std::vector<std::string> f = split_csv_line(line, source);
    if (f.size() != 7)
      fail(Errc::incomplete_table, "expected 7 fields, got " +
                               std::to_string(f.size()) + " in " + source);
    rows.push_back({f[0], f[1], f[2], f[3], f[4], parse_value(f[5], source), f[6]});
  }
  return rows;
}

CaseMetricTable table_from_rows(std::span<const MetricRow> rows,
                                const std::string& task_id,
                                std::span<const std::string> algorithms,
                                std::span<const std::string> case_ids,
                                std::span<const std::string> roi_ids) {
  CaseMetricTable table;
  table.task_id = task_id;
  table.algorithms.assign(algorithms.begin(), algorithms.end());
  table.case_ids.assign(case_ids.begin(), case_ids.end());
  table.roi_ids.assign(roi_ids.begin(), roi_ids.end());
  table.allocate();

  auto index_of = [](std::span<const std::string> list,
                     const std::string& name) {
    for (std::size_t i = 0; i < list.size(); ++i)
      if (list[i] == name) return static_cast<int>(i);
    return -1;
  };

  std::vector<std::uint8_t> seen(table.values.size(), 0);
  for (const MetricRow& r : rows) {
    if (r.task != task_id) continue;
    const int a = index_of(algorithms, r.algorithm);
    const int c = index_of(case_ids, r.case_id);
    const int ri = index_of(roi_ids, r.roi);
    const int m = r.metric == "DSC" ? 0 : r.metric == "NSD" ? 1 : -1;
    if (a < 0 || c < 0 || ri < 0 || m < 0) {
      fail(Errc::incomplete_table,
           "unexpected row (" + r.algorithm + ", " + r.case_id + ", " + r.roi +
               ", " + r.metric + ") for task " + task_id);
    }
    if (!(r.value >= 0.0 && r.value <= 1.0)) {
      fail(Errc::invalid_metric_value,
           "metric value " + format_double(r.value) + " outside [0,1] for (" +
               r.algorithm + ", " + r.case_id + ", " + r.roi + ", " + r.metric +
               ")");
    }
    const std::size_t i = table.index(a, c, ri, m);
    if (seen[i]) {
      fail(Errc::incomplete_table,
           "duplicate row (" + r.algorithm + ", " + r.case_id + ", " + r.roi +
               ", " + r.metric + ") for task " + task_id);
    }
    seen[i] = 1;
    table.values[i] = r.value;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      fail(Errc::incomplete_table,
           "task " + task_id + " metrics are incomplete (" +
               std::to_string(std::count(seen.begin(), seen.end(), 0)) +
               " entries missing); a missing entry is an input error, not a zero");
    }
  }
  return table;
}

Json ranking_to_json(const RankingTable& table) {
  Json j;
  switch (table.level) {
    case RankLevel::roi_metric: j["level"] = "roi_metric"; break;
    case RankLevel::task: j["level"] = "task"; break;
    case RankLevel::phase: j["level"] = "phase"; break;
  }
  j["algorithms"] = table.algorithms;
  j["scores"] = table.scores;
  j["ranks"] = table.ranks;
  return j;
}

RankingTable ranking_from_json(const Json& j) {
  RankingTable t;
  const std::string level = j.at("level").get<std::string>();
  t.level = level == "task"    ? RankLevel::task
            : level == "phase" ? RankLevel::phase
                               : RankLevel::roi_metric;
  t.algorithms = j.at("algorithms").get<std::vector<std::string>>();
  t.scores = j.at("scores").get<std::vector<double>>();
  t.ranks = j.at("ranks").get<std::vector<double>>();
  return t;
}

Json significance_to_json(const SignificanceResult& res) {
  Json j;
  j["roi"] = res.roi_id;
  j["metric"] = res.metric;
  j["alpha"] = res.alpha;
  j["algorithms"] = res.algorithms;
  j["scores"] = res.scores;
  j["ranks"] = res.ranks;
  return j;
}

Json bootstrap_summary_to_json(const BootstrapSummary& summary,
                               std::uint64_t seed) {
  Json j;
  j["task_id"] = summary.task_id;
  j["n_samples"] = summary.n_samples;
  j["seed"] = seed;
  j["tau_median"] = summary.tau_median;
  j["tau_q1"] = summary.tau_q1;
  j["tau_q3"] = summary.tau_q3;
  Json freq = Json::array();
  for (std::size_t a = 0; a < summary.algorithms.size(); ++a) {
    Json row;
    row["algorithm"] = summary.algorithms[a];
    Json counts = Json::object();
    for (const auto& [rank, count] : summary.rank_frequency[a])
      counts[format_double(rank)] = count;
    row["counts"] = counts;
    freq.push_back(row);
  }
  j["rank_frequency"] = freq;
  return j;
}

std::string rank_frequency_csv(std::span<const BootstrapSummary> summaries) {
  std::string out = "task,algorithm,rank,count\n";
  for (const BootstrapSummary& s : summaries) {
    for (std::size_t a = 0; a < s.algorithms.size(); ++a) {
      for (const auto& [rank, count] : s.rank_frequency[a]) {
        out += csv_field(s.task_id);
        out += ',';
        out += csv_field(s.algorithms[a]);
        out += ',';
        out += format_double(rank);
        out += ',';
        out += std::to_string(count);
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace segrank
