#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "segrank/serialize.hpp"
#include "svg_check.hpp"
#include "tmpdir.hpp"

namespace fs = std::filesystem;
using segrank::Json;
using segrank::read_text_file;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q += c;
  }
  return q + "'";
}

CliResult run_cli(const std::vector<std::string>& args,
                  const fs::path& scratch) {
  const char* bin = std::getenv("SEGRANK_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "SEGRANK_CLI must point at the built binary");
  std::string cmd = shell_quote(bin);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  const fs::path out_file = scratch / "stdout.txt";
  const fs::path err_file = scratch / "stderr.txt";
  cmd += " > " + shell_quote(out_file.string()) + " 2> " +
         shell_quote(err_file.string());
  const int raw = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = read_text_file(out_file);
  r.err = read_text_file(err_file);
  return r;
}

struct Challenge {
  testutil::TmpDir tmp{"cli"};
  fs::path manifest;
  fs::path out;

  Challenge() {
    manifest = fixtures::write_challenge(tmp / "challenge");
    out = tmp / "out";
  }

  CliResult run(std::vector<std::string> args) {
    return run_cli(args, tmp.path());
  }

  CliResult evaluate(int jobs = 1) {
    return run({"evaluate", "--manifest", manifest.string(), "--out-dir",
                out.string(), "--jobs", std::to_string(jobs)});
  }
  CliResult rank() {
    return run({"rank", "--manifest", manifest.string(), "--out-dir",
                out.string()});
  }
  CliResult bootstrap() {
    return run({"bootstrap", "--manifest", manifest.string(), "--out-dir",
                out.string()});
  }
  CliResult report() {
    return run({"report", "--manifest", manifest.string(), "--out-dir",
                out.string()});
  }
};

int csv_line_count(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit 1 before touching data") {
  testutil::TmpDir tmp("usage");
  CHECK(run_cli({}, tmp.path()).exit_code == 1);
  CHECK(run_cli({"frobnicate"}, tmp.path()).exit_code == 1);
  CHECK(run_cli({"evaluate"}, tmp.path()).exit_code == 1);  // missing flags
  CHECK(run_cli({"--help"}, tmp.path()).exit_code == 0);
}

TEST_CASE("evaluate writes one complete deterministic csv per task") {
  Challenge fx;
  const CliResult r = fx.evaluate(1);
  CHECK_MESSAGE(r.exit_code == 0, r.err);

  int tasks_seen = 0;
  for (const auto& task : fixtures::default_tasks()) {
    const fs::path csv = fx.out / ("metrics_" + task.task_id + ".csv");
    REQUIRE_MESSAGE(fs::exists(csv), csv.string());
    const std::string text = read_text_file(csv);
    // header + algorithms * cases * rois * 2 metrics
    const int expected = 1 + 4 * task.n_cases * task.n_rois * 2;
    CHECK(csv_line_count(text) == expected);
    ++tasks_seen;
  }
  CHECK(tasks_seen == 3);

  // byte-identical rerun under parallelism
  const std::string before =
      read_text_file(fx.out / "metrics_task_alpha.csv");
  const CliResult r2 = fx.evaluate(3);
  CHECK(r2.exit_code == 0);
  CHECK(read_text_file(fx.out / "metrics_task_alpha.csv") == before);
}

TEST_CASE("evaluate honors task filters and rejects unknown names") {
  Challenge fx;
  const CliResult r = fx.run({"evaluate", "--manifest", fx.manifest.string(),
                              "--out-dir", fx.out.string(), "--task",
                              "task_beta"});
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(fx.out / "metrics_task_beta.csv"));
  CHECK_FALSE(fs::exists(fx.out / "metrics_task_alpha.csv"));

  const CliResult bad =
      fx.run({"evaluate", "--manifest", fx.manifest.string(), "--out-dir",
              fx.out.string(), "--task", "task_zzz"});
  CHECK(bad.exit_code == 1);
}

TEST_CASE("a corrupt prediction aborts evaluation naming the case") {
  Challenge fx;
  const fs::path dir =
      fx.tmp / "challenge" / "submissions" / "bravo" / "task_beta";
  fs::path victim = dir / "c3.nii";
  if (!fs::exists(victim)) victim = dir / "c3.nii.gz";
  REQUIRE(fs::exists(victim));
  std::ofstream(victim, std::ios::binary) << "garbage";
  const CliResult r = fx.evaluate();
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("c3") != std::string::npos);
  CHECK(r.err.find("bravo") != std::string::npos);
}

TEST_CASE("rank produces the planted leaderboard at every level") {
  Challenge fx;
  REQUIRE(fx.evaluate().exit_code == 0);
  const CliResult r = fx.rank();
  CHECK_MESSAGE(r.exit_code == 0, r.err);

  const Json j = Json::parse(read_text_file(fx.out / "leaderboard.json"));
  CHECK(j.at("alpha") == 0.05);
  REQUIRE(j.at("phases").size() == 2);

  for (const auto& phase : j.at("phases")) {
    for (const auto& task : phase.at("tasks")) {
      const auto& tr = task.at("task_ranks");
      CHECK(tr.at("algorithms") ==
            Json::array({"atlas", "bravo", "cobalt", "delta"}));
      CHECK(tr.at("ranks")[0] == 1.0);  // atlas planted best
      const auto& ranks = tr.at("ranks");
      CHECK(ranks[1] < ranks[2]);
      CHECK(ranks[2] < ranks[3]);
    }
    const auto& pr = phase.at("phase_ranks").at("ranks");
    CHECK(pr[0] == 1.0);
    CHECK(pr[1] < pr[2]);
    CHECK(pr[2] < pr[3]);
  }

  // variant rankings land per task when the manifest requests them
  const auto& first_task = j.at("phases")[0].at("tasks")[0];
  CHECK(first_task.contains("variant_ranks"));
  CHECK(first_task.at("variant_ranks").size() == 4);

  const std::string csv = read_text_file(fx.out / "leaderboard.csv");
  CHECK(csv.find("phase,rank,team,median_dsc,iqr_low,iqr_high\n") == 0);
  CHECK(csv.find("atlas") != std::string::npos);
}

TEST_CASE("rank without metrics csv is a data error") {
  Challenge fx;
  const CliResult r = fx.rank();
  CHECK(r.exit_code == 2);
}

TEST_CASE("rank rejects a csv with a missing row") {
  Challenge fx;
  REQUIRE(fx.evaluate().exit_code == 0);
  const fs::path csv = fx.out / "metrics_task_beta.csv";
  std::string text = read_text_file(csv);
  text.erase(text.rfind("atlas,"), text.find('\n', text.rfind("atlas,")) + 1 -
                                        text.rfind("atlas,"));
  segrank::write_text_file(csv, text);
  const CliResult r = fx.rank();
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("task_beta") != std::string::npos);
}

TEST_CASE("bootstrap emits deterministic summaries across jobs") {
  Challenge fx;
  REQUIRE(fx.evaluate().exit_code == 0);
  const CliResult r = fx.run({"bootstrap", "--manifest", fx.manifest.string(),
                              "--out-dir", fx.out.string(), "--jobs", "1"});
  CHECK_MESSAGE(r.exit_code == 0, r.err);
  const std::string first = read_text_file(fx.out / "bootstrap.json");
  const std::string freq = read_text_file(fx.out / "rank_frequency.csv");

  const CliResult r2 = fx.run({"bootstrap", "--manifest", fx.manifest.string(),
                               "--out-dir", fx.out.string(), "--jobs", "4"});
  CHECK(r2.exit_code == 0);
  CHECK(read_text_file(fx.out / "bootstrap.json") == first);
  CHECK(read_text_file(fx.out / "rank_frequency.csv") == freq);

  const Json j = Json::parse(first);
  REQUIRE(j.at("tasks").size() == 3);
  for (const auto& task : j.at("tasks")) {
    CHECK(task.at("n_samples") == 50);
    // planted dominant: atlas rank 1 in every sample
    const auto& counts = task.at("rank_frequency")[0].at("counts");
    CHECK(counts.at("1") == 50);
  }
  CHECK(freq.rfind("task,algorithm,rank,count\n", 0) == 0);
}

TEST_CASE("report renders all four plot families as well-formed svg") {
  Challenge fx;
  REQUIRE(fx.evaluate().exit_code == 0);
  REQUIRE(fx.rank().exit_code == 0);
  REQUIRE(fx.bootstrap().exit_code == 0);
  const CliResult r = fx.report();
  CHECK_MESSAGE(r.exit_code == 0, r.err);

  std::vector<fs::path> expect = {
      fx.out / "dsc_boxplot_task_alpha.svg",
      fx.out / "dsc_boxplot_task_beta.svg",
      fx.out / "dsc_boxplot_task_gamma.svg",
      fx.out / "dsc_boxplot_task_alpha_stats.csv",
      fx.out / "rank_boxplot.svg",
      fx.out / "line_plot_task_alpha.svg",
      fx.out / "rank_frequency.svg",
  };
  for (const auto& p : expect) {
    REQUIRE_MESSAGE(fs::exists(p), p.string());
    if (p.extension() == ".svg") {
      const auto xml = testutil::check_xml(read_text_file(p));
      CHECK_MESSAGE(xml.ok, (p.string() + ": " + xml.why));
    }
  }
}

TEST_CASE("report without upstream outputs warns and skips") {
  Challenge fx;
  const CliResult r = fx.report();
  CHECK(r.exit_code == 0);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(fx.out / "rank_frequency.svg"));
}

TEST_CASE("validate accepts the truth and rejects corruption") {
  Challenge fx;
  const fs::path good =
      fx.tmp / "challenge" / "submissions" / "atlas" / "task_beta";
  const CliResult ok =
      fx.run({"validate", good.string(), "--manifest", fx.manifest.string(),
              "--task", "task_beta", "--out-dir", fx.out.string()});
  CHECK_MESSAGE(ok.exit_code == 0, ok.err);
  CHECK(fs::exists(fx.out / "validation_task_beta.json"));
  const Json report =
      Json::parse(read_text_file(fx.out / "validation_task_beta.json"));
  CHECK(report.at("valid") == true);

  testutil::TmpDir bad_dir("bad_submission");
  segrank::write_text_file(bad_dir / "c0.nii", "not nifti");
  const CliResult bad =
      fx.run({"validate", bad_dir.path().string(), "--manifest",
              fx.manifest.string(), "--task", "task_beta"});
  CHECK(bad.exit_code == 2);
  CHECK(bad.out.find("c0") != std::string::npos);
}
