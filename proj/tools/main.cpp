#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segrank/error.hpp"
#include "segrank/parallel.hpp"
#include "segrank/pipeline.hpp"

namespace {

int exit_code_for(segrank::Errc code) {
  switch (code) {
    case segrank::Errc::manifest_error:
    case segrank::Errc::unknown_variant:
      return 1;
    default:
      return 2;
  }
}

struct CommonFlags {
  std::string manifest;
  std::string out_dir;
  std::vector<std::string> tasks;
  std::string phase;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_out,
                bool with_filters = true) {
  cmd->add_option("--manifest", flags.manifest, "challenge manifest (JSON)")
      ->required();
  auto* out = cmd->add_option("--out-dir", flags.out_dir,
                              "directory for inputs/outputs of the pipeline");
  if (need_out) out->required();
  if (with_filters) {
    cmd->add_option("--task", flags.tasks,
                    "restrict to these task ids (repeatable)");
    cmd->add_option("--phase", flags.phase, "restrict to one phase");
  }
  cmd->add_option("--jobs", flags.jobs,
                  "worker threads (0 = hardware concurrency)");
}

segrank::RunOptions to_options(const CommonFlags& flags) {
  segrank::RunOptions o;
  o.out_dir = flags.out_dir;
  o.tasks = flags.tasks;
  o.phase = flags.phase;
  o.jobs = flags.jobs == 0 ? segrank::default_jobs() : flags.jobs;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmentation challenge evaluation engine"};
  app.require_subcommand(1);

  CommonFlags eval_flags;
  CLI::App* eval = app.add_subcommand(
      "evaluate", "compute DSC and NSD for every (algorithm, case, roi)");
  add_common(eval, eval_flags, true);

  CommonFlags rank_flags;
  double alpha = 0.05;
  std::vector<std::string> variants;
  CLI::App* rank = app.add_subcommand(
      "rank", "significance rankings and leaderboard from metrics CSVs");
  add_common(rank, rank_flags, true);
  CLI::Option* alpha_opt = rank->add_option(
      "--alpha", alpha, "significance level for pairwise tests (default 0.05)");
  CLI::Option* variants_opt = rank->add_option(
      "--variants", variants,
      "ranking variants to compute (significance, mean_then_rank, "
      "median_then_rank, rank_then_mean)");

  CommonFlags boot_flags;
  int samples = 1000;
  std::uint64_t seed = 0;
  double boot_alpha = 0.05;
  CLI::App* boot = app.add_subcommand(
      "bootstrap", "ranking stability over resampled cases");
  add_common(boot, boot_flags, true);
  CLI::Option* samples_opt = boot->add_option(
      "--samples", samples, "number of bootstrap samples (default 1000)");
  CLI::Option* seed_opt =
      boot->add_option("--seed", seed, "bootstrap RNG seed (default 0)");
  CLI::Option* boot_alpha_opt =
      boot->add_option("--alpha", boot_alpha, "significance level");

  CommonFlags report_flags;
  CLI::App* report = app.add_subcommand(
      "report", "render SVG plots for whatever outputs exist");
  add_common(report, report_flags, true);

  CommonFlags validate_flags;
  std::string validate_task;
  std::string submission_dir;
  CLI::App* validate = app.add_subcommand(
      "validate", "check a submission directory against one task");
  validate->add_option("dir", submission_dir, "submission directory")
      ->required();
  add_common(validate, validate_flags, false, false);
  validate->add_option("--task", validate_task, "task to validate against")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  try {
    if (eval->parsed()) {
      segrank::ChallengeManifest m = segrank::load_manifest(eval_flags.manifest);
      segrank::run_evaluate(m, to_options(eval_flags));
    } else if (rank->parsed()) {
      segrank::ChallengeManifest m = segrank::load_manifest(rank_flags.manifest);
      segrank::RunOptions o = to_options(rank_flags);
      if (alpha_opt->count()) o.alpha = alpha;
      if (variants_opt->count()) o.variants = variants;
      segrank::run_rank(m, o);
    } else if (boot->parsed()) {
      segrank::ChallengeManifest m = segrank::load_manifest(boot_flags.manifest);
      segrank::RunOptions o = to_options(boot_flags);
      if (samples_opt->count()) o.samples = samples;
      if (seed_opt->count()) o.seed = seed;
      if (boot_alpha_opt->count()) o.alpha = boot_alpha;
      segrank::run_bootstrap(m, o);
    } else if (report->parsed()) {
      segrank::ChallengeManifest m =
          segrank::load_manifest(report_flags.manifest);
      segrank::run_report(m, to_options(report_flags));
    } else if (validate->parsed()) {
      segrank::ChallengeManifest m =
          segrank::load_manifest(validate_flags.manifest);
      segrank::ValidationReport rep = segrank::run_validate(
          m, validate_task, submission_dir, to_options(validate_flags));
      for (const segrank::CaseCheck& c : rep.cases) {
        if (c.ok) {
          std::cout << "ok      " << c.case_id << "\n";
        } else {
          std::cout << "FAIL    " << c.case_id << "  " << c.code << ": "
                    << c.detail << "\n";
        }
      }
      std::cout << (rep.valid ? "submission valid" : "submission INVALID")
                << " (" << rep.cases.size() << " cases)\n";
      return rep.valid ? 0 : 2;
    }
  } catch (const segrank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
