#include "polygate/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>

#include "polygate/atomic_file.hpp"
#include "polygate/dataset.hpp"
#include "polygate/error.hpp"
#include "polygate/evaluation.hpp"
#include "polygate/losses.hpp"
#include "polygate/outlier.hpp"
#include "polygate/reports.hpp"
#include "polygate/version.hpp"

namespace polygate {

namespace fs = std::filesystem;

namespace {

/// A check on our own output failed; maps to exit code 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

constexpr const char* kReportSuffix = ".convert.json";

struct ImageRecord {
  fs::path image;
  int width = 0;
  int height = 0;
};

// Conversion reports written next to the labels map ids back to images.
std::map<std::string, ImageRecord> load_image_records(const fs::path& labels) {
  std::map<std::string, ImageRecord> out;
  if (!fs::is_directory(labels)) return out;
  std::vector<fs::path> reports;
  for (const auto& entry : fs::directory_iterator(labels)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > std::string(kReportSuffix).size() &&
        name.ends_with(kReportSuffix)) {
      reports.push_back(entry.path());
    }
  }
  std::sort(reports.begin(), reports.end());
  for (const auto& path : reports) {
    Json doc;
    try {
      doc = Json::parse(read_file(path));
      for (const auto& s : doc.at("samples")) {
        out[s.at("id").get<std::string>()] = {s.at("image").get<std::string>(), s.at("width").get<int>(),
                                              s.at("height").get<int>()};
      }
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed conversion report " + path.string() + ": " + e.what());
    }
  }
  return out;
}

std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- convert

struct ConvertArgs {
  std::string images;
  std::string masks;
  std::string dataset;
  std::string labels;
  std::string report;
  int threshold = 128;
  std::size_t min_area = 64;
  int connectivity = 8;
};

int cmd_convert(const ConvertArgs& a, std::ostream& out) {
  ConvertOptions opts;
  opts.threshold = a.threshold;
  opts.min_area = a.min_area;
  opts.connectivity = connectivity_from_int(a.connectivity);

  const fs::path report_path = a.report.empty() ? fs::path(a.labels) / (a.dataset + kReportSuffix) : fs::path(a.report);
  const Json config{{"command", "convert"},       {"images", a.images},       {"masks", a.masks},
                    {"dataset", a.dataset},       {"labels", a.labels},       {"report", report_path.generic_string()},
                    {"threshold", a.threshold},   {"min_area", a.min_area},   {"connectivity", a.connectivity}};

  std::vector<Sample> samples = ingest(fs::absolute(a.images), fs::absolute(a.masks), a.dataset, opts);
  for (const auto& s : samples) write_labels(s, a.labels);
  write_file_atomic(report_path, dump_artifact(conversion_report_to_json(samples, a.dataset, config)));

  std::size_t boxes = 0;
  std::size_t dropped = 0;
  for (const auto& s : samples) {
    boxes += s.boxes.size();
    dropped += s.dropped_components;
  }
  out << "converted " << samples.size() << " images from " << a.dataset << ": " << boxes << " boxes, " << dropped
      << " components below min-area dropped\n";
  return kExitOk;
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  std::string labels;
  std::string output;
  int folds = 5;
  double test = 0.20;
  double val = 0.15;
  std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& a, std::ostream& out) {
  const std::vector<std::string> ids = list_label_ids(a.labels);
  SplitManifest m = kfold_split(ids, a.folds, a.test, a.val, a.seed);
  m.config = Json{{"command", "split"}, {"labels", a.labels}, {"folds", a.folds},
                  {"test", a.test},     {"val", a.val},       {"seed", a.seed}};
  try {
    check_manifest(m, ids.size(), a.test, a.val);
  } catch (const DomainError& e) {
    throw InvariantError(e.what());
  }
  write_file_atomic(a.output, dump_artifact(manifest_to_json(m)));
  out << "split " << ids.size() << " samples into " << a.folds << " folds (seed " << a.seed << ")\n";
  for (std::size_t f = 0; f < m.folds.size(); ++f) {
    out << "  fold " << f << ": train " << m.folds[f].train.size() << ", val " << m.folds[f].val.size()
        << ", test " << m.folds[f].test.size() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
  std::string manifest;
  std::string labels;
  std::string output;
  std::string report;
  std::size_t fold = 0;
  int k = 30;
  double contamination = 0.05;
  int feature_side = 32;
};

int cmd_filter(const FilterArgs& a, std::ostream& out, std::ostream& err) {
  SplitManifest m = read_manifest(a.manifest);
  if (a.fold >= m.folds.size()) {
    throw DomainError("fold " + std::to_string(a.fold) + " out of range (manifest has " +
                      std::to_string(m.folds.size()) + ")");
  }
  const std::vector<std::string> ids = m.folds[a.fold].train_and_val();
  if (ids.size() <= static_cast<std::size_t>(a.k)) {
    err << "error: fold " << a.fold << " has " << ids.size() << " train+val samples, not more than k=" << a.k
        << "; pass a smaller --k\n";
    return kExitInput;
  }
  // Validated up front so a bad rate fails before any image is decoded.
  removal_count(ids.size(), a.contamination);

  const auto records = load_image_records(a.labels);
  std::vector<std::pair<std::string, fs::path>> files;
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    auto it = records.find(id);
    if (it == records.end()) {
      missing.push_back("no conversion record for " + id + " under " + a.labels);
    } else {
      files.emplace_back(id, it->second.image);
    }
  }
  if (!missing.empty()) throw IngestError(std::move(missing));

  const LofResult result = filter_outliers(lof_scores(featurize_files(files, a.feature_side), a.k), a.contamination);
  std::vector<Removal> removals;
  for (const auto& s : result.scores) {
    if (std::binary_search(result.removed_ids.begin(), result.removed_ids.end(), s.sample_id)) {
      removals.push_back({s.sample_id, s.lof});
    }
  }
  std::sort(removals.begin(), removals.end(), [](const Removal& x, const Removal& y) { return x.id < y.id; });

  const fs::path manifest_out = a.output.empty() ? fs::path(a.manifest) : fs::path(a.output);
  fs::path report_path = a.report;
  if (report_path.empty()) {
    report_path = fs::path(a.manifest).parent_path() /
                  (fs::path(a.manifest).stem().string() + ".fold" + std::to_string(a.fold) + ".lof.json");
  }
  const Json filter_config{{"manifest", a.manifest}, {"labels", a.labels},       {"fold", a.fold},
                           {"k", a.k},               {"contamination", a.contamination},
                           {"feature_side", a.feature_side}};

  const bool unchanged = m.folds[a.fold].removed == removals;
  if (!unchanged) {
    m.config["filter"][std::to_string(a.fold)] = filter_config;
    m = attach_removals(std::move(m), a.fold, removals);
    try {
      const std::size_t corpus = m.folds[a.fold].train.size() + m.folds[a.fold].val.size() + m.folds[a.fold].test.size();
      check_manifest(m, corpus, m.config.value("test", 0.20), m.config.value("val", 0.15));
    } catch (const DomainError& e) {
      throw InvariantError(e.what());
    }
  }
  if (!unchanged || manifest_out != fs::path(a.manifest)) {
    write_file_atomic(manifest_out, dump_artifact(manifest_to_json(m)));
  }
  Json report_config = filter_config;
  report_config["command"] = "filter";
  write_file_atomic(report_path, dump_artifact(removal_report_to_json(result, a.fold, report_config)));

  out << "fold " << a.fold << ": scored " << ids.size() << " train+val samples, removed " << removals.size() << "\n";
  for (const auto& r : removals) out << "  removed " << r.id << " (lof " << r.score << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string labels;
  std::string predictions;
  std::string output;
  double iou = 0.5;
  std::size_t max_det = kDefaultMaxDetections;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.predictions)) throw IoError("prediction directory not found: " + a.predictions);
  const std::vector<std::string> ids = list_label_ids(a.labels);
  const auto records = load_image_records(a.labels);
  const std::set<std::string> known(ids.begin(), ids.end());

  std::vector<std::string> problems;
  for (const auto& pid : list_label_ids(a.predictions)) {
    if (!known.count(pid)) problems.push_back("prediction file for unknown image: " + label_path(a.predictions, pid).string());
  }

  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
  for (const auto& id : ids) {
    // IoU is invariant to per-axis scaling, so unit dimensions are exact when no record exists.
    double w = 1.0;
    double h = 1.0;
    if (auto it = records.find(id); it != records.end()) {
      w = it->second.width;
      h = it->second.height;
    }
    try {
      for (const auto& nb : parse_labels(label_path(a.labels, id))) gts.push_back({id, nb.class_id, from_norm(nb, w, h)});
      const fs::path pred = label_path(a.predictions, id);
      if (fs::exists(pred)) {
        auto parsed = parse_predictions(pred, id, w, h);
        dets.insert(dets.end(), parsed.begin(), parsed.end());
      }
    } catch (const ParseError& e) {
      problems.push_back(e.what());
    }
  }
  if (!problems.empty()) {
    for (const auto& p : problems) err << "error: " << p << "\n";
    return kExitInput;
  }

  const EvalReport report = evaluate(dets, gts, a.iou, a.max_det);
  if (std::abs(precision_recall_f1(report.counts.tp, report.counts.fp, report.counts.fn).f1 - report.f1) > 1e-12) {
    throw InvariantError("report F1 inconsistent with its precision and recall");
  }
  const Json config{{"command", "eval"}, {"labels", a.labels}, {"predictions", a.predictions},
                    {"iou", a.iou},      {"max_det", a.max_det}};
  write_file_atomic(a.output, dump_artifact(eval_report_to_json(report, config)));

  out << "images " << ids.size() << ", ground truth " << gts.size() << ", detections " << dets.size() << "\n"
      << "precision     " << fmt_metric(report.precision) << "\n"
      << "recall        " << fmt_metric(report.recall) << "\n"
      << "f1            " << fmt_metric(report.f1) << "\n"
      << "mAP@0.5       " << fmt_metric(report.map50) << "\n"
      << "mAP@0.5:0.95  " << fmt_metric(report.map50_95) << "\n"
      << "tp " << report.counts.tp << "  fp " << report.counts.fp << "  fn " << report.counts.fn << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- loss

struct LossArgs {
  std::vector<double> pred;
  std::vector<double> gt;
  std::vector<int> cls_y;
  std::vector<double> cls_p;
  std::vector<double> cls_w;
  std::vector<double> dfl_p;
  std::vector<double> dfl_pred;
  std::vector<double> dfl_gt;
  LossWeights weights;
};

int cmd_loss(const LossArgs& a, std::ostream& out) {
  const BBox pred{a.pred[0], a.pred[1], a.pred[2], a.pred[3]};
  const BBox gt{a.gt[0], a.gt[1], a.gt[2], a.gt[3]};
  const CiouTerms terms = ciou_terms(pred, gt);

  ClsBatch cls{a.cls_y, a.cls_p, a.cls_w};
  if (cls.w.empty()) cls.w.assign(cls.y.size(), 1.0);
  const double cls_value = cls_loss(cls);
  const double dfl_value = dfl_loss({a.dfl_p, a.dfl_pred, a.dfl_gt});
  const double total = total_loss(terms.loss, cls_value, dfl_value, a.weights);

  Json doc{{"tool", kToolName}, {"version", kToolVersion}};
  doc["box"] = terms.loss;
  doc["cls"] = cls_value;
  doc["dfl"] = dfl_value;
  doc["total"] = total;
  doc["weights"] = Json{{"lambda_box", a.weights.lambda_box},
                        {"lambda_cls", a.weights.lambda_cls},
                        {"lambda_dfl", a.weights.lambda_dfl}};
  doc["box_terms"] = Json{{"iou", terms.iou},
                          {"center_distance_sq", terms.center_distance_sq},
                          {"enclosing_diagonal_sq", terms.enclosing_diagonal_sq},
                          {"aspect", terms.aspect},
                          {"alpha", terms.alpha}};
  out << dump_artifact(doc);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polyp-detection dataset tooling: mask conversion, k-fold splits, LOF filtering, evaluation",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "Derive YOLO box labels from segmentation masks");
  convert->add_option("--images", conv.images, "Image directory")->required();
  convert->add_option("--masks", conv.masks, "Mask directory (same file stems as images)")->required();
  convert->add_option("--dataset", conv.dataset, "Dataset name, used as the sample id prefix")->required();
  convert->add_option("--labels", conv.labels, "Output label root")->required();
  convert->add_option("--report", conv.report, "Conversion report path (default <labels>/<dataset>.convert.json)");
  convert->add_option("--threshold", conv.threshold, "Mask binarization threshold")
      ->capture_default_str()->check(CLI::Range(0, 255));
  convert->add_option("--min-area", conv.min_area, "Smallest component kept, in pixels")->capture_default_str();
  convert->add_option("--connectivity", conv.connectivity, "Pixel connectivity")
      ->capture_default_str()->check(CLI::IsMember({4, 8}));

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Write a seeded k-fold train/val/test manifest");
  split_cmd->add_option("--labels", split.labels, "Label root; every *.txt is one sample")->required();
  split_cmd->add_option("--output", split.output, "Manifest path")->required();
  split_cmd->add_option("--folds", split.folds, "Fold count")->capture_default_str();
  split_cmd->add_option("--test", split.test, "Test fraction per fold")->capture_default_str();
  split_cmd->add_option("--val", split.val, "Validation fraction per fold")->capture_default_str();
  split_cmd->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

  FilterArgs filt;
  auto* filter = app.add_subcommand("filter", "Score a fold's train+val images with LOF and record removals");
  filter->add_option("--manifest", filt.manifest, "Manifest to update")->required();
  filter->add_option("--labels", filt.labels, "Label root holding the conversion reports")->required();
  filter->add_option("--fold", filt.fold, "Fold index")->required();
  filter->add_option("--output", filt.output, "Updated manifest path (default: overwrite --manifest)");
  filter->add_option("--report", filt.report, "Removal report path");
  filter->add_option("--k", filt.k, "Neighbors per point")->capture_default_str()->check(CLI::PositiveNumber);
  filter->add_option("--contamination", filt.contamination, "Fraction of samples removed")->capture_default_str();
  filter->add_option("--feature-side", filt.feature_side, "Side of the luminance thumbnail")
      ->capture_default_str()->check(CLI::Range(2, 4096));

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score prediction files against ground-truth labels");
  eval->add_option("--labels", ev.labels, "Ground-truth label root")->required();
  eval->add_option("--predictions", ev.predictions, "Prediction root (same relative layout)")->required();
  eval->add_option("--output", ev.output, "EvalReport JSON path")->required();
  eval->add_option("--iou", ev.iou, "IoU threshold for the precision/recall/F1 row")->capture_default_str();
  eval->add_option("--max-det", ev.max_det, "Detections kept per image")->capture_default_str();

  LossArgs lo;
  auto* loss = app.add_subcommand("loss", "Evaluate the box, classification, and localization loss kernels");
  loss->add_option("--pred", lo.pred, "Predicted box x1,y1,x2,y2")->required()->delimiter(',')->expected(4);
  loss->add_option("--gt", lo.gt, "Ground-truth box x1,y1,x2,y2")->required()->delimiter(',')->expected(4);
  loss->add_option("--cls-y", lo.cls_y, "Classification labels")->delimiter(',');
  loss->add_option("--cls-p", lo.cls_p, "Classification probabilities")->delimiter(',');
  loss->add_option("--cls-w", lo.cls_w, "Positive-term weights (default 1)")->delimiter(',');
  loss->add_option("--dfl-p", lo.dfl_p, "Localization weights")->delimiter(',');
  loss->add_option("--dfl-pred", lo.dfl_pred, "Predicted coordinates")->delimiter(',');
  loss->add_option("--dfl-gt", lo.dfl_gt, "Ground-truth coordinates")->delimiter(',');
  loss->add_option("--lambda-box", lo.weights.lambda_box, "Box loss weight")->capture_default_str();
  loss->add_option("--lambda-cls", lo.weights.lambda_cls, "Classification loss weight")->capture_default_str();
  loss->add_option("--lambda-dfl", lo.weights.lambda_dfl, "Localization loss weight")->capture_default_str();

  std::vector<const char*> argv{kToolName};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (convert->parsed()) return cmd_convert(conv, out);
    if (split_cmd->parsed()) return cmd_split(split, out);
    if (filter->parsed()) return cmd_filter(filt, out, err);
    if (eval->parsed()) return cmd_eval(ev, out, err);
    if (loss->parsed()) return cmd_loss(lo, out);
  } catch (const IngestError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace polygate
