#include <doctest.h>

#include <functional>
#include <string>

#include "segrank/manifest.hpp"
#include "segrank/serialize.hpp"
#include "tmpdir.hpp"

using namespace segrank;

namespace {

Json base_manifest() {
  return Json::parse(R"({
    "phases": [
      {
        "name": "development",
        "tasks": [
          {
            "task_id": "task_a",
            "gt_dir": "gt/task_a",
            "rois": [
              {"roi_id": "organ", "label_value": 1, "nsd_tolerance_mm": 2.0},
              {"roi_id": "tumor", "label_value": 2}
            ],
            "cases": ["c1", "c2"]
          }
        ]
      },
      {
        "name": "mystery",
        "tasks": [
          {
            "task_id": "task_b",
            "gt_dir": "gt/task_b",
            "rois": [{"roi_id": "organ"}],
            "cases": ["c1"]
          }
        ]
      }
    ],
    "algorithms": [
      {"name": "alpha", "predictions": {"task_a": "sub/alpha/a", "task_b": "sub/alpha/b"}},
      {"name": "bravo", "predictions": {"task_a": "sub/bravo/a", "task_b": "sub/bravo/b"}}
    ],
    "ranking": {"alpha": 0.05, "variants": ["significance", "mean_then_rank"]},
    "bootstrap": {"n_samples": 250, "seed": 77}
  })");
}

struct Loaded {
  testutil::TmpDir tmp{"manifest"};
  ChallengeManifest load(const Json& j) {
    const auto path = tmp / "challenge.json";
    write_text_file(path, j.dump(2));
    return load_manifest(path);
  }
  Errc load_error(const Json& j) {
    try {
      load(j);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc{};
  }
};

}  // namespace

TEST_CASE("manifest happy path with defaults") {
  Loaded fx;
  const ChallengeManifest m = fx.load(base_manifest());
  REQUIRE(m.phases.size() == 2);
  CHECK(m.phases[0].name == "development");
  REQUIRE(m.phases[0].tasks.size() == 1);
  const TaskConfig& a = m.phases[0].tasks[0];
  CHECK(a.task_id == "task_a");
  CHECK(a.gt_dir == fx.tmp.path() / "gt/task_a");
  REQUIRE(a.rois.size() == 2);
  CHECK(a.rois[0].nsd_tolerance_mm == 2.0);
  CHECK(a.rois[1].label_value == 2);
  CHECK(a.rois[1].nsd_tolerance_mm == 1.0);  // default
  CHECK(m.phases[1].tasks[0].rois[0].label_value == 1);  // default

  CHECK(m.alpha == 0.05);
  CHECK(m.variants == std::vector<std::string>{"significance", "mean_then_rank"});
  CHECK(m.bootstrap_samples == 250);
  CHECK(m.bootstrap_seed == 77);

  REQUIRE(m.algorithms.size() == 2);
  CHECK(*m.algorithms[0].predictions_for("task_b") ==
        fx.tmp.path() / "sub/alpha/b");
  CHECK(m.algorithms[0].predictions_for("task_zzz") == nullptr);

  CHECK(m.find_task("task_b") != nullptr);
  CHECK(m.find_task("task_zzz") == nullptr);
  CHECK(m.phase_of("task_b")->name == "mystery");
  CHECK(m.all_tasks().size() == 2);
}

TEST_CASE("manifest defaults when optional blocks are absent") {
  Loaded fx;
  Json j = base_manifest();
  j.erase("ranking");
  j.erase("bootstrap");
  const ChallengeManifest m = fx.load(j);
  CHECK(m.alpha == 0.05);
  CHECK(m.variants.empty());
  CHECK(m.bootstrap_samples == 1000);
  CHECK(m.bootstrap_seed == 0);
}

TEST_CASE("manifest structural errors") {
  Loaded fx;

  Json no_phases = base_manifest();
  no_phases.erase("phases");
  CHECK(fx.load_error(no_phases) == Errc::manifest_error);

  Json dup_task = base_manifest();
  dup_task["phases"][1]["tasks"][0]["task_id"] = "task_a";
  CHECK(fx.load_error(dup_task) == Errc::manifest_error);

  Json dup_algo = base_manifest();
  dup_algo["algorithms"][1]["name"] = "alpha";
  CHECK(fx.load_error(dup_algo) == Errc::manifest_error);

  Json dup_case = base_manifest();
  dup_case["phases"][0]["tasks"][0]["cases"] = {"c1", "c1"};
  CHECK(fx.load_error(dup_case) == Errc::manifest_error);

  Json no_cases = base_manifest();
  no_cases["phases"][0]["tasks"][0]["cases"] = Json::array();
  CHECK(fx.load_error(no_cases) == Errc::manifest_error);

  Json no_rois = base_manifest();
  no_rois["phases"][0]["tasks"][0]["rois"] = Json::array();
  CHECK(fx.load_error(no_rois) == Errc::manifest_error);

  Json bad_label = base_manifest();
  bad_label["phases"][0]["tasks"][0]["rois"][0]["label_value"] = 0;
  CHECK(fx.load_error(bad_label) == Errc::manifest_error);

  Json bad_tol = base_manifest();
  bad_tol["phases"][0]["tasks"][0]["rois"][0]["nsd_tolerance_mm"] = 0.0;
  CHECK(fx.load_error(bad_tol) == Errc::manifest_error);

  Json missing_pred = base_manifest();
  missing_pred["algorithms"][0]["predictions"].erase("task_b");
  CHECK(fx.load_error(missing_pred) == Errc::manifest_error);

  Json unknown_pred = base_manifest();
  unknown_pred["algorithms"][0]["predictions"]["task_zzz"] = "x";
  CHECK(fx.load_error(unknown_pred) == Errc::manifest_error);

  Json bad_variant = base_manifest();
  bad_variant["ranking"]["variants"] = {"significance", "bogus"};
  CHECK(fx.load_error(bad_variant) == Errc::unknown_variant);

  Json bad_samples = base_manifest();
  bad_samples["bootstrap"]["n_samples"] = 0;
  CHECK(fx.load_error(bad_samples) == Errc::manifest_error);
}

TEST_CASE("alpha must lie in the half-open interval") {
  Loaded fx;
  for (double bad : {0.0, -0.1, 0.51, 1.0}) {
    Json j = base_manifest();
    j["ranking"]["alpha"] = bad;
    CHECK(fx.load_error(j) == Errc::manifest_error);
  }
  Json ok = base_manifest();
  ok["ranking"]["alpha"] = 0.5;
  CHECK(fx.load(ok).alpha == 0.5);
}

TEST_CASE("not-even-json is a manifest error") {
  Loaded fx;
  const auto path = fx.tmp / "broken.json";
  write_text_file(path, "{ definitely not json");
  try {
    load_manifest(path);
    FAIL("expected manifest_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::manifest_error);
  }
  try {
    load_manifest(fx.tmp / "absent.json");
    FAIL("expected io_error or manifest_error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }
}

TEST_CASE("more than three rois per task only warns") {
  Loaded fx;
  Json j = base_manifest();
  j["phases"][0]["tasks"][0]["rois"] = Json::array();
  for (int i = 0; i < 4; ++i)
    j["phases"][0]["tasks"][0]["rois"].push_back(
        Json{{"roi_id", "r" + std::to_string(i)}, {"label_value", i + 1}});
  const ChallengeManifest m = fx.load(j);
  CHECK(m.phases[0].tasks[0].rois.size() == 4);
}
