#include "segrank/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <mutex>

#include "segrank/error.hpp"
#include "segrank/parallel.hpp"
#include "segrank/serialize.hpp"
#include "segrank/stats.hpp"

namespace segrank {

namespace {

bool task_selected(const RunOptions& options, const std::string& task_id) {
  if (options.tasks.empty()) return true;
  return std::find(options.tasks.begin(), options.tasks.end(), task_id) !=
         options.tasks.end();
}

bool phase_selected(const RunOptions& options, const std::string& phase) {
  return options.phase.empty() || options.phase == phase;
}

void check_filters(const ChallengeManifest& manifest, const RunOptions& options) {
  for (const std::string& t : options.tasks) {
    if (!manifest.find_task(t))
      fail(Errc::manifest_error, "task filter names unknown task '" + t + "'");
  }
  if (!options.phase.empty()) {
    bool found = false;
    for (const PhaseConfig& p : manifest.phases)
      if (p.name == options.phase) found = true;
    if (!found)
      fail(Errc::manifest_error,
           "phase filter names unknown phase '" + options.phase + "'");
  }
}

std::vector<std::string> roi_ids_of(const TaskConfig& task) {
  std::vector<std::string> ids;
  for (const RoiSpec& r : task.rois) ids.push_back(r.roi_id);
  return ids;
}

std::vector<std::string> algorithm_names(const ChallengeManifest& manifest) {
  std::vector<std::string> names;
  for (const AlgorithmConfig& a : manifest.algorithms) names.push_back(a.name);
  return names;
}

void ensure_out_dir(const RunOptions& options) {
  if (options.out_dir.empty())
    fail(Errc::manifest_error, "an output directory is required");
  std::filesystem::create_directories(options.out_dir);
}

CaseMetricTable load_task_table(const ChallengeManifest& manifest,
                                const RunOptions& options,
                                const TaskConfig& task) {
  const std::filesystem::path path =
      metrics_csv_path(options.out_dir, task.task_id);
  std::vector<MetricRow> rows =
      parse_metrics_csv(read_text_file(path), path.string());
  std::vector<std::string> algos = algorithm_names(manifest);
  std::vector<std::string> rois = roi_ids_of(task);
  return table_from_rows(rows, task.task_id, algos, task.cases, rois);
}

double effective_alpha(const ChallengeManifest& manifest,
                       const RunOptions& options) {
  double alpha = options.alpha.value_or(manifest.alpha);
  if (!(alpha > 0.0 && alpha <= 0.5))
    fail(Errc::manifest_error,
         "alpha must lie in (0, 0.5], got " + format_double(alpha));
  return alpha;
}

std::vector<RankVariant> effective_variants(const ChallengeManifest& manifest,
                                            const RunOptions& options) {
  const std::vector<std::string>& names =
      options.variants ? *options.variants : manifest.variants;
  std::vector<RankVariant> variants;
  for (const std::string& n : names) variants.push_back(parse_variant(n));
  return variants;
}

struct TaskRankBundle {
  std::vector<SignificanceResult> roi_metric;
  RankingTable task_ranks;
  std::vector<std::pair<RankVariant, RankingTable>> variant_ranks;
};

// Per-task ranking: significance results per (roi, metric), their task-mean
// aggregate, and one task-level table per requested variant (per-variant
// ranks are aggregated across (roi, metric) the same way task_rank
// aggregates significance ranks).
TaskRankBundle rank_task(const CaseMetricTable& table,
                         std::span<const std::string> roi_ids, double alpha,
                         std::span<const RankVariant> variants) {
  TaskRankBundle bundle;
  for (int r = 0; r < table.n_rois(); ++r)
    for (int m = 0; m < CaseMetricTable::kMetricCount; ++m)
      bundle.roi_metric.push_back(significance_scores(table, r, m, alpha));
  bundle.task_ranks = task_rank(bundle.roi_metric, roi_ids);

  for (RankVariant v : variants) {
    std::vector<std::vector<double>> per_pair;
    for (int r = 0; r < table.n_rois(); ++r)
      for (int m = 0; m < CaseMetricTable::kMetricCount; ++m)
        per_pair.push_back(variant_ranking(table, v, r, m, alpha).ranks);
    RankingTable agg;
    agg.level = RankLevel::task;
    agg.algorithms = table.algorithms;
    agg.scores.resize(table.algorithms.size());
    for (std::size_t a = 0; a < table.algorithms.size(); ++a) {
      std::vector<double> ranks;
      for (const auto& pr : per_pair) ranks.push_back(pr[a]);
      agg.scores[a] = mean_sorted(ranks);
    }
    agg.ranks = rank_from_scores(agg.scores, false);
    bundle.variant_ranks.emplace_back(v, std::move(agg));
  }
  return bundle;
}

}  // namespace

std::filesystem::path metrics_csv_path(const std::filesystem::path& out_dir,
                                       const std::string& task_id) {
  return out_dir / ("metrics_" + task_id + ".csv");
}

void run_evaluate(const ChallengeManifest& manifest, const RunOptions& options) {
  check_filters(manifest, options);
  ensure_out_dir(options);

  for (const PhaseConfig& phase : manifest.phases) {
    if (!phase_selected(options, phase.name)) continue;
    for (const TaskConfig& task : phase.tasks) {
      if (!task_selected(options, task.task_id)) continue;
      const int n_cases = static_cast<int>(task.cases.size());
      const int n_algos = static_cast<int>(manifest.algorithms.size());
      std::cerr << "evaluate: task " << task.task_id << " (" << n_cases
                << " cases x " << n_algos << " algorithms)\n";

      // records[case][algorithm]
      std::vector<std::vector<std::vector<CaseMetricRecord>>> slots(
          static_cast<std::size_t>(n_cases));
      std::vector<std::vector<std::string>> failures(
          static_cast<std::size_t>(n_cases));
      std::vector<std::exception_ptr> first_error(
          static_cast<std::size_t>(n_cases));

      parallel_for(n_cases, options.jobs, [&](std::int64_t c) {
        const std::string& case_id = task.cases[static_cast<std::size_t>(c)];
        auto& case_failures = failures[static_cast<std::size_t>(c)];
        auto record_failure = [&](const std::string& who, const Error& e) {
          case_failures.push_back("task " + task.task_id + " case " + case_id +
                                  " (" + who + "): " + e.what());
          if (!first_error[static_cast<std::size_t>(c)])
            first_error[static_cast<std::size_t>(c)] =
                std::make_exception_ptr(e);
        };

        LabelVolume gt;
        try {
          std::filesystem::path gt_file =
              resolve_case_file(task.gt_dir, case_id);
          if (gt_file.empty())
            fail(Errc::io_error, "no ground-truth file for case " + case_id +
                                     " under " + task.gt_dir.string());
          gt = load_label_volume(gt_file);
        } catch (const Error& e) {
          record_failure("ground truth", e);
          return;
        }

        auto& case_slots = slots[static_cast<std::size_t>(c)];
        case_slots.resize(static_cast<std::size_t>(n_algos));
        for (int a = 0; a < n_algos; ++a) {
          const AlgorithmConfig& algo =
              manifest.algorithms[static_cast<std::size_t>(a)];
          try {
            const std::filesystem::path* dir =
                algo.predictions_for(task.task_id);
            std::filesystem::path pred_file = resolve_case_file(*dir, case_id);
            if (pred_file.empty())
              fail(Errc::io_error, "no prediction file for case " + case_id +
                                       " under " + dir->string());
            LabelVolume pred = load_label_volume(pred_file);
            case_slots[static_cast<std::size_t>(a)] =
                evaluate_case(gt, pred, task.rois, case_id);
          } catch (const Error& e) {
            record_failure(algo.name, e);
          }
        }
      });

      bool failed = false;
      std::exception_ptr rethrow;
      for (int c = 0; c < n_cases; ++c) {
        for (const std::string& msg : failures[static_cast<std::size_t>(c)]) {
          std::cerr << "evaluate failed: " << msg << "\n";
          failed = true;
        }
        if (!rethrow && first_error[static_cast<std::size_t>(c)])
          rethrow = first_error[static_cast<std::size_t>(c)];
      }
      if (failed) std::rethrow_exception(rethrow);

      std::vector<MetricRow> rows;
      rows.reserve(static_cast<std::size_t>(n_algos) * n_cases *
                   task.rois.size() * 2);
      for (int a = 0; a < n_algos; ++a) {
        const std::string& name =
            manifest.algorithms[static_cast<std::size_t>(a)].name;
        for (int c = 0; c < n_cases; ++c) {
          auto more = metric_rows(
              task.task_id, name,
              slots[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)]);
          rows.insert(rows.end(), more.begin(), more.end());
        }
      }
      const std::filesystem::path out =
          metrics_csv_path(options.out_dir, task.task_id);
      write_text_file(out, metrics_csv(rows));
      std::cerr << "evaluate: wrote " << out.string() << "\n";
    }
  }
}

void run_rank(const ChallengeManifest& manifest, const RunOptions& options) {
  check_filters(manifest, options);
  ensure_out_dir(options);
  const double alpha = effective_alpha(manifest, options);
  const std::vector<RankVariant> variants = effective_variants(manifest, options);

  Json out;
  out["alpha"] = alpha;
  Json jphases = Json::array();
  std::string csv = "phase,rank,team,median_dsc,iqr_low,iqr_high\n";

  for (const PhaseConfig& phase : manifest.phases) {
    if (!phase_selected(options, phase.name)) continue;
    Json jphase;
    jphase["phase"] = phase.name;
    Json jtasks = Json::array();

    std::vector<RankingTable> task_tables;
    std::vector<SignificanceResult> pooled;
    // DSC values per algorithm across the whole phase, for the CSV mirror.
    std::map<std::string, std::vector<double>> phase_dsc;
    bool complete_phase = true;

    for (const TaskConfig& task : phase.tasks) {
      if (!task_selected(options, task.task_id)) {
        complete_phase = false;
        continue;
      }
      CaseMetricTable table = load_task_table(manifest, options, task);
      std::vector<std::string> roi_ids = roi_ids_of(task);
      TaskRankBundle bundle = rank_task(table, roi_ids, alpha, variants);

      Json jtask;
      jtask["task_id"] = task.task_id;
      Json jrm = Json::array();
      for (const SignificanceResult& r : bundle.roi_metric)
        jrm.push_back(significance_to_json(r));
      jtask["roi_metric_ranks"] = jrm;
      jtask["task_ranks"] = ranking_to_json(bundle.task_ranks);
      if (!bundle.variant_ranks.empty()) {
        Json jv = Json::array();
        for (const auto& [v, ranking] : bundle.variant_ranks) {
          Json e = ranking_to_json(ranking);
          e["variant"] = variant_name(v);
          jv.push_back(std::move(e));
        }
        jtask["variant_ranks"] = jv;
      }
      jtasks.push_back(std::move(jtask));

      task_tables.push_back(bundle.task_ranks);
      pooled.insert(pooled.end(), bundle.roi_metric.begin(),
                    bundle.roi_metric.end());
      for (int a = 0; a < table.n_algorithms(); ++a) {
        auto& vals = phase_dsc[table.algorithms[static_cast<std::size_t>(a)]];
        for (int c = 0; c < table.n_cases(); ++c)
          for (int r = 0; r < table.n_rois(); ++r)
            vals.push_back(table.at(a, c, r, 0));
      }
    }
    jphase["tasks"] = std::move(jtasks);

    if (complete_phase && !task_tables.empty()) {
      RankingTable phase_ranks = phase_ranking(task_tables);
      jphase["phase_ranks"] = ranking_to_json(phase_ranks);
      jphase["pooled_ranks"] = ranking_to_json(pooled_phase_ranking(pooled));

      // CSV mirror, ordered by phase rank then name.
      std::vector<std::size_t> order(phase_ranks.algorithms.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (phase_ranks.ranks[x] != phase_ranks.ranks[y])
          return phase_ranks.ranks[x] < phase_ranks.ranks[y];
        return phase_ranks.algorithms[x] < phase_ranks.algorithms[y];
      });
      for (std::size_t i : order) {
        const std::string& name = phase_ranks.algorithms[i];
        const std::vector<double>& dsc = phase_dsc[name];
        csv += csv_field(phase.name);
        csv += ',';
        csv += format_double(phase_ranks.ranks[i]);
        csv += ',';
        csv += csv_field(name);
        csv += ',';
        csv += format_double(quantile(dsc, 0.5));
        csv += ',';
        csv += format_double(quantile(dsc, 0.25));
        csv += ',';
        csv += format_double(quantile(dsc, 0.75));
        csv += '\n';
      }
    } else if (!task_tables.empty()) {
      std::cerr << "rank: phase '" << phase.name
                << "' is filtered to a task subset; phase aggregates skipped\n";
    }
    jphases.push_back(std::move(jphase));
  }
  out["phases"] = std::move(jphases);

  write_text_file(options.out_dir / "leaderboard.json", out.dump(2) + "\n");
  write_text_file(options.out_dir / "leaderboard.csv", csv);
  std::cerr << "rank: wrote leaderboard.json and leaderboard.csv\n";
}

void run_bootstrap(const ChallengeManifest& manifest, const RunOptions& options) {
  check_filters(manifest, options);
  ensure_out_dir(options);
  const double alpha = effective_alpha(manifest, options);
  const int n_samples = options.samples.value_or(manifest.bootstrap_samples);
  if (n_samples < 1) fail(Errc::manifest_error, "samples must be >= 1");
  const std::uint64_t seed = options.seed.value_or(manifest.bootstrap_seed);

  std::vector<BootstrapSummary> summaries;
  for (const PhaseConfig& phase : manifest.phases) {
    if (!phase_selected(options, phase.name)) continue;
    for (const TaskConfig& task : phase.tasks) {
      if (!task_selected(options, task.task_id)) continue;
      CaseMetricTable table = load_task_table(manifest, options, task);
      std::vector<std::string> roi_ids = roi_ids_of(task);

      TaskRanker ranker = [&roi_ids, alpha](const CaseMetricTable& t) {
        std::vector<SignificanceResult> results;
        for (int r = 0; r < t.n_rois(); ++r)
          for (int m = 0; m < CaseMetricTable::kMetricCount; ++m)
            results.push_back(significance_scores(t, r, m, alpha));
        return task_rank(results, roi_ids);
      };

      RankingTable original = ranker(table);
      BootstrapConfig config{n_samples, seed};
      std::vector<RankingTable> samples =
          bootstrap_rankings(table, config, ranker, options.jobs);
      summaries.push_back(summarize(original, samples, task.task_id));
      std::cerr << "bootstrap: task " << task.task_id << " done (" << n_samples
                << " samples)\n";
    }
  }

  Json out;
  Json jtasks = Json::array();
  for (const BootstrapSummary& s : summaries)
    jtasks.push_back(bootstrap_summary_to_json(s, seed));
  out["tasks"] = std::move(jtasks);
  write_text_file(options.out_dir / "bootstrap.json", out.dump(2) + "\n");
  write_text_file(options.out_dir / "rank_frequency.csv",
                  rank_frequency_csv(summaries));
  std::cerr << "bootstrap: wrote bootstrap.json and rank_frequency.csv\n";
}

void run_report(const ChallengeManifest& manifest, const RunOptions& options) {
  check_filters(manifest, options);
  ensure_out_dir(options);

  // DSC boxplots straight from the metrics tables.
  for (const PhaseConfig& phase : manifest.phases) {
    if (!phase_selected(options, phase.name)) continue;
    for (const TaskConfig& task : phase.tasks) {
      if (!task_selected(options, task.task_id)) continue;
      const std::filesystem::path csv =
          metrics_csv_path(options.out_dir, task.task_id);
      if (!std::filesystem::exists(csv)) {
        std::cerr << "report: " << csv.string()
                  << " missing, DSC boxplot skipped\n";
        continue;
      }
      CaseMetricTable table = load_task_table(manifest, options, task);
      std::vector<BoxGroupSeries> series;
      for (int a = 0; a < table.n_algorithms(); ++a) {
        BoxGroupSeries g;
        g.algorithm = table.algorithms[static_cast<std::size_t>(a)];
        for (int r = 0; r < table.n_rois(); ++r) {
          std::vector<double> vals;
          for (int c = 0; c < table.n_cases(); ++c)
            vals.push_back(table.at(a, c, r, 0));
          g.roi_values.emplace_back(table.roi_ids[static_cast<std::size_t>(r)],
                                    std::move(vals));
        }
        series.push_back(std::move(g));
      }
      write_text_file(
          options.out_dir / ("dsc_boxplot_" + task.task_id + ".svg"),
          render_dsc_boxplot(task.task_id, series));
      write_text_file(
          options.out_dir / ("dsc_boxplot_" + task.task_id + "_stats.csv"),
          boxplot_stats_csv(series));
    }
  }

  // Rank boxplot and line plots from the leaderboard.
  const std::filesystem::path lb_path = options.out_dir / "leaderboard.json";
  if (!std::filesystem::exists(lb_path)) {
    std::cerr << "report: leaderboard.json missing, rank plots skipped\n";
  } else {
    Json lb = Json::parse(read_text_file(lb_path));
    std::vector<std::string> algos = algorithm_names(manifest);

    std::vector<RankDistribution> dists;
    for (const std::string& name : algos)
      dists.push_back(RankDistribution{name, {}});
    double max_rank = 2.0;

    for (const Json& jphase : lb.at("phases")) {
      const std::string phase_name = jphase.at("phase").get<std::string>();
      if (!phase_selected(options, phase_name)) continue;
      for (auto& d : dists) d.phase_ranks.emplace_back(phase_name, std::vector<double>{});

      for (const Json& jtask : jphase.at("tasks")) {
        const std::string task_id = jtask.at("task_id").get<std::string>();
        if (!task_selected(options, task_id)) continue;
        for (const Json& jrm : jtask.at("roi_metric_ranks")) {
          const auto names = jrm.at("algorithms").get<std::vector<std::string>>();
          const auto ranks = jrm.at("ranks").get<std::vector<double>>();
          for (std::size_t i = 0; i < names.size(); ++i) {
            for (auto& d : dists) {
              if (d.algorithm == names[i]) {
                d.phase_ranks.back().second.push_back(ranks[i]);
                max_rank = std::max(max_rank, static_cast<double>(names.size()));
              }
            }
          }
        }

        if (jtask.contains("variant_ranks") &&
            jtask.at("variant_ranks").size() >= 2) {
          std::vector<VariantColumn> columns;
          std::vector<std::string> col_algos;
          for (const Json& jv : jtask.at("variant_ranks")) {
            VariantColumn col;
            col.variant = jv.at("variant").get<std::string>();
            col_algos = jv.at("algorithms").get<std::vector<std::string>>();
            col.ranks = jv.at("ranks").get<std::vector<double>>();
            columns.push_back(std::move(col));
          }
          write_text_file(options.out_dir / ("line_plot_" + task_id + ".svg"),
                          render_line_plot(task_id, col_algos, columns));
        } else {
          std::cerr << "report: task " << task_id
                    << " has fewer than two ranking variants, line plot "
                       "skipped\n";
        }
      }
    }

    bool any_ranks = false;
    for (const auto& d : dists)
      for (const auto& [phase, ranks] : d.phase_ranks)
        if (!ranks.empty()) any_ranks = true;
    if (any_ranks) {
      write_text_file(options.out_dir / "rank_boxplot.svg",
                      render_rank_boxplot(dists, max_rank));
    } else {
      std::cerr << "report: no roi/metric ranks found, rank boxplot skipped\n";
    }
  }

  // Stacked rank-frequency plot from the bootstrap summaries.
  const std::filesystem::path bs_path = options.out_dir / "bootstrap.json";
  if (!std::filesystem::exists(bs_path)) {
    std::cerr << "report: bootstrap.json missing, frequency plot skipped\n";
  } else {
    Json bs = Json::parse(read_text_file(bs_path));
    std::vector<BootstrapSummary> summaries;
    for (const Json& jt : bs.at("tasks")) {
      const std::string task_id = jt.at("task_id").get<std::string>();
      if (!task_selected(options, task_id)) continue;
      BootstrapSummary s;
      s.task_id = task_id;
      s.n_samples = jt.at("n_samples").get<int>();
      s.tau_median = jt.at("tau_median").get<double>();
      s.tau_q1 = jt.at("tau_q1").get<double>();
      s.tau_q3 = jt.at("tau_q3").get<double>();
      for (const Json& jrow : jt.at("rank_frequency")) {
        s.algorithms.push_back(jrow.at("algorithm").get<std::string>());
        std::map<double, std::int64_t> counts;
        for (auto it = jrow.at("counts").begin(); it != jrow.at("counts").end();
             ++it)
          counts[std::stod(it.key())] = it.value().get<std::int64_t>();
        s.rank_frequency.push_back(std::move(counts));
      }
      summaries.push_back(std::move(s));
    }
    if (!summaries.empty()) {
      write_text_file(options.out_dir / "rank_frequency.svg",
                      render_stacked_frequency(summaries));
    } else {
      std::cerr << "report: bootstrap.json has no selected tasks, frequency "
                   "plot skipped\n";
    }
  }
  std::cerr << "report: done\n";
}

ValidationReport run_validate(const ChallengeManifest& manifest,
                              const std::string& task_id,
                              const std::filesystem::path& submission_dir,
                              const RunOptions& options) {
  const TaskConfig* task = manifest.find_task(task_id);
  if (!task)
    fail(Errc::manifest_error, "manifest has no task '" + task_id + "'");

  SubmissionManifest sub;
  sub.task_id = task_id;
  for (const RoiSpec& roi : task->rois) sub.legal_labels.insert(roi.label_value);
  for (const std::string& case_id : task->cases) {
    std::filesystem::path gt_file = resolve_case_file(task->gt_dir, case_id);
    if (gt_file.empty())
      fail(Errc::io_error, "no ground-truth file for case " + case_id +
                               " under " + task->gt_dir.string());
    LabelVolume gt = load_label_volume(gt_file);
    sub.cases.push_back({case_id, gt.extents, gt.spacing});
  }

  ValidationReport report = validate_submission(submission_dir, sub);

  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    Json j;
    j["task_id"] = report.task_id;
    j["valid"] = report.valid;
    Json jcases = Json::array();
    for (const CaseCheck& c : report.cases) {
      Json jc;
      jc["case"] = c.case_id;
      jc["ok"] = c.ok;
      if (!c.ok) {
        jc["code"] = c.code;
        jc["detail"] = c.detail;
      }
      jcases.push_back(std::move(jc));
    }
    j["cases"] = std::move(jcases);
    write_text_file(options.out_dir / ("validation_" + task_id + ".json"),
                    j.dump(2) + "\n");
  }
  return report;
}

}  // namespace segrank
