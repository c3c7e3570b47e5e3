#include "polygate/reports.hpp"

#include <algorithm>
#include <set>

#include "polygate/atomic_file.hpp"
#include "polygate/error.hpp"
#include "polygate/version.hpp"

namespace polygate {

namespace {

Json header() { return Json{{"tool", kToolName}, {"version", kToolVersion}}; }

std::vector<std::string> string_list(const Json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) throw DomainError(std::string("manifest fold lacks '") + key + "'");
  return doc.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::string dump_artifact(const Json& doc) { return doc.dump(2) + "\n"; }

Json manifest_to_json(const SplitManifest& m) {
  Json doc = header();
  doc["config"] = m.config;
  doc["seed"] = m.seed;
  doc["prng"] = m.prng;
  doc["fold_count"] = m.folds.size();
  Json folds = Json::array();
  for (const auto& f : m.folds) {
    Json removed = Json::array();
    for (const auto& r : f.removed) removed.push_back(Json{{"id", r.id}, {"score", r.score}});
    folds.push_back(Json{{"train", f.train}, {"val", f.val}, {"test", f.test}, {"removed", removed}});
  }
  doc["folds"] = std::move(folds);
  return doc;
}

SplitManifest manifest_from_json(const Json& doc) {
  try {
    SplitManifest m;
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.prng = doc.at("prng").get<std::string>();
    if (m.prng != kShufflePrng) throw DomainError("unsupported shuffle generator: " + m.prng);
    if (doc.contains("config")) m.config = doc.at("config");
    for (const auto& jf : doc.at("folds")) {
      Fold f;
      f.train = string_list(jf, "train");
      f.val = string_list(jf, "val");
      f.test = string_list(jf, "test");
      for (const auto& jr : jf.at("removed")) f.removed.push_back({jr.at("id").get<std::string>(), jr.at("score").get<double>()});
      m.folds.push_back(std::move(f));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed manifest: ") + e.what());
  }
}

SplitManifest read_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(doc);
}

Json eval_report_to_json(const EvalReport& r, const Json& config) {
  Json doc = header();
  doc["precision"] = r.precision;
  doc["recall"] = r.recall;
  doc["f1"] = r.f1;
  doc["map50"] = r.map50;
  doc["map50_95"] = r.map50_95;
  Json table = Json::array();
  for (const auto& t : r.per_threshold_ap) table.push_back(Json{{"iou", t.iou}, {"ap", t.ap}});
  doc["per_threshold_ap"] = std::move(table);
  doc["counts"] = Json{{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}};
  doc["config"] = config;
  return doc;
}

Json removal_report_to_json(const LofResult& result, std::size_t fold, const Json& config) {
  std::vector<const LofScore*> ranked;
  for (const auto& s : result.scores) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(), [](const LofScore* a, const LofScore* b) {
    return a->lof != b->lof ? a->lof > b->lof : a->sample_id < b->sample_id;
  });
  const std::set<std::string> removed(result.removed_ids.begin(), result.removed_ids.end());

  Json doc = header();
  doc["config"] = config;
  doc["fold"] = fold;
  doc["sample_count"] = result.scores.size();
  doc["removed_count"] = result.removed_ids.size();
  Json scores = Json::array();
  for (const LofScore* s : ranked) {
    scores.push_back(Json{{"id", s->sample_id}, {"lof", s->lof}, {"lrd", s->lrd}, {"removed", removed.count(s->sample_id) > 0}});
  }
  doc["scores"] = std::move(scores);
  return doc;
}

Json conversion_report_to_json(const std::vector<Sample>& samples, const std::string& dataset, const Json& config) {
  Json doc = header();
  doc["config"] = config;
  doc["dataset"] = dataset;
  std::size_t boxes = 0;
  std::size_t dropped = 0;
  Json list = Json::array();
  for (const auto& s : samples) {
    boxes += s.boxes.size();
    dropped += s.dropped_components;
    list.push_back(Json{{"id", s.sample_id},
                        {"image", s.image_path.generic_string()},
                        {"mask", s.mask_path.generic_string()},
                        {"width", s.width},
                        {"height", s.height},
                        {"boxes", s.boxes.size()},
                        {"dropped_components", s.dropped_components}});
  }
  doc["totals"] = Json{{"samples", samples.size()}, {"boxes", boxes}, {"dropped_components", dropped}};
  doc["samples"] = std::move(list);
  return doc;
}

}  // namespace polygate
