#include "segrank/manifest.hpp"

#include <iostream>
#include <set>

#include <json.hpp>

#include "segrank/error.hpp"
#include "segrank/serialize.hpp"

namespace segrank {

std::vector<const TaskConfig*> ChallengeManifest::all_tasks() const {
  std::vector<const TaskConfig*> out;
  for (const PhaseConfig& p : phases)
    for (const TaskConfig& t : p.tasks) out.push_back(&t);
  return out;
}

const TaskConfig* ChallengeManifest::find_task(const std::string& task_id) const {
  for (const TaskConfig* t : all_tasks())
    if (t->task_id == task_id) return t;
  return nullptr;
}

const PhaseConfig* ChallengeManifest::phase_of(const std::string& task_id) const {
  for (const PhaseConfig& p : phases)
    for (const TaskConfig& t : p.tasks)
      if (t.task_id == task_id) return &p;
  return nullptr;
}

namespace {

[[noreturn]] void bad(const std::string& msg) {
  fail(Errc::manifest_error, msg);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad("missing '" + std::string(key) + "' in " + where);
  return *it;
}

}  // namespace

ChallengeManifest load_manifest(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    bad("cannot parse " + path.string() + ": " + e.what());
  }

  ChallengeManifest m;
  m.root = path.has_parent_path() ? path.parent_path()
                                  : std::filesystem::path(".");

  std::set<std::string> task_ids;
  for (const Json& jp : need(j, "phases", "manifest")) {
    PhaseConfig phase;
    phase.name = need(jp, "name", "phase").get<std::string>();
    for (const Json& jt : need(jp, "tasks", "phase '" + phase.name + "'")) {
      TaskConfig task;
      task.task_id = need(jt, "task_id", "task").get<std::string>();
      const std::string where = "task '" + task.task_id + "'";
      if (!task_ids.insert(task.task_id).second)
        bad("duplicate task id '" + task.task_id + "'");
      task.gt_dir = m.root / need(jt, "gt_dir", where).get<std::string>();

      const Json& jrois = need(jt, "rois", where);
      if (jrois.empty()) bad(where + " must list at least one roi");
      if (jrois.size() > 3)
        std::cerr << "warning: " << where << " lists " << jrois.size()
                  << " rois; more than 3 is unusual\n";
      std::set<std::string> roi_ids;
      for (const Json& jr : jrois) {
        RoiSpec roi;
        roi.roi_id = need(jr, "roi_id", where).get<std::string>();
        if (!roi_ids.insert(roi.roi_id).second)
          bad("duplicate roi id '" + roi.roi_id + "' in " + where);
        roi.label_value = jr.value("label_value", 1);
        if (roi.label_value < 1)
          bad("label_value must be >= 1 (0 is background) in " + where);
        roi.nsd_tolerance_mm = jr.value("nsd_tolerance_mm", 1.0);
        if (!(roi.nsd_tolerance_mm > 0.0))
          bad("nsd_tolerance_mm must be positive in " + where);
        task.rois.push_back(std::move(roi));
      }

      std::set<std::string> case_ids;
      for (const Json& jc : need(jt, "cases", where)) {
        std::string id = jc.get<std::string>();
        if (!case_ids.insert(id).second)
          bad("duplicate case id '" + id + "' in " + where);
        task.cases.push_back(std::move(id));
      }
      if (task.cases.empty()) bad(where + " must list at least one case");
      phase.tasks.push_back(std::move(task));
    }
    m.phases.push_back(std::move(phase));
  }
  if (m.phases.empty()) bad("manifest lists no phases");

  std::set<std::string> algo_names;
  for (const Json& ja : need(j, "algorithms", "manifest")) {
    AlgorithmConfig algo;
    algo.name = need(ja, "name", "algorithm").get<std::string>();
    if (!algo_names.insert(algo.name).second)
      bad("duplicate algorithm name '" + algo.name + "'");
    const Json& jp = need(ja, "predictions", "algorithm '" + algo.name + "'");
    for (auto it = jp.begin(); it != jp.end(); ++it) {
      if (!task_ids.count(it.key()))
        bad("algorithm '" + algo.name + "' maps unknown task '" + it.key() +
            "'");
      algo.predictions.emplace_back(it.key(),
                                    m.root / it.value().get<std::string>());
    }
    for (const std::string& t : task_ids) {
      if (!algo.predictions_for(t))
        bad("algorithm '" + algo.name + "' has no predictions entry for task '" +
            t + "'");
    }
    m.algorithms.push_back(std::move(algo));
  }
  if (m.algorithms.empty()) bad("manifest lists no algorithms");

  if (j.contains("ranking")) {
    const Json& jr = j["ranking"];
    m.alpha = jr.value("alpha", 0.05);
    if (jr.contains("variants")) {
      for (const Json& v : jr["variants"])
        m.variants.push_back(v.get<std::string>());
    }
  }
  if (!(m.alpha > 0.0 && m.alpha <= 0.5))
    bad("alpha must lie in (0, 0.5], got " + format_double(m.alpha));
  for (const std::string& v : m.variants) parse_variant(v);

  if (j.contains("bootstrap")) {
    const Json& jb = j["bootstrap"];
    m.bootstrap_samples = jb.value("n_samples", 1000);
    if (m.bootstrap_samples < 1) bad("bootstrap n_samples must be >= 1");
    m.bootstrap_seed = jb.value("seed", std::uint64_t{0});
  }
  return m;
}

}  // namespace segrank
