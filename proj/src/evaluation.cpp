#include "polygate/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "polygate/error.hpp"

namespace polygate {

namespace {

void validate_detection(const Detection& d) {
  if (!d.box.valid()) throw DomainError("invalid detection box in image " + d.image_id);
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw DomainError("detection confidence outside [0,1] in image " + d.image_id);
  }
}

// Indices of `dets` sorted by descending confidence; equal confidences keep input order.
std::vector<std::size_t> confidence_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].confidence > dets[b].confidence; });
  return order;
}

using GroupKey = std::pair<std::string, int>;

}  // namespace

std::size_t MatchOutcome::tp_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(verdicts.begin(), verdicts.end(), [](const DetectionVerdict& v) { return v.is_tp; }));
}

std::vector<Detection> cap_detections(const std::vector<Detection>& dets, std::size_t max_det) {
  if (max_det == 0) throw DomainError("max detections must be >= 1");
  std::map<std::string, std::vector<std::size_t>> per_image;
  for (std::size_t i : confidence_order(dets)) per_image[dets[i].image_id].push_back(i);

  std::vector<bool> keep(dets.size(), false);
  for (const auto& [image, idx] : per_image) {
    for (std::size_t r = 0; r < idx.size() && r < max_det; ++r) keep[idx[r]] = true;
  }
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (keep[i]) out.push_back(dets[i]);
  }
  return out;
}

MatchOutcome match(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double iou_thr) {
  if (!(iou_thr > 0.0 && iou_thr < 1.0)) throw DomainError("IoU threshold must be in (0,1)");
  for (const auto& d : dets) validate_detection(d);

  std::map<GroupKey, std::vector<std::size_t>> gt_groups;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    require_valid(gts[g].box);
    gt_groups[{gts[g].image_id, gts[g].class_id}].push_back(g);
  }

  std::vector<bool> taken(gts.size(), false);
  MatchOutcome out;
  out.total_gt = gts.size();
  out.verdicts.reserve(dets.size());
  std::size_t tp = 0;

  for (std::size_t i : confidence_order(dets)) {
    const Detection& d = dets[i];
    DetectionVerdict verdict{i, d.confidence, false, std::nullopt};
    auto group = gt_groups.find({d.image_id, d.class_id});
    if (group != gt_groups.end()) {
      double best_iou = -1.0;
      for (std::size_t g : group->second) {
        if (taken[g]) continue;
        const double v = iou(d.box, gts[g].box);
        if (v >= iou_thr && v > best_iou) {
          best_iou = v;
          verdict.matched_gt = g;
        }
      }
    }
    if (verdict.matched_gt) {
      taken[*verdict.matched_gt] = true;
      verdict.is_tp = true;
      ++tp;
    }
    out.verdicts.push_back(verdict);
  }
  out.fn_count = gts.size() - tp;
  return out;
}

PrecisionRecallF1 precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  PrecisionRecallF1 r;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(tp, tp + fp);
  r.recall = ratio(tp, tp + fn);
  const double s = r.precision + r.recall;
  r.f1 = s == 0.0 ? 0.0 : 2.0 * (r.precision * r.recall) / s;
  return r;
}

PrCurve pr_curve(const MatchOutcome& outcome) {
  if (outcome.total_gt == 0) throw DomainError("average precision is undefined without ground truth");

  std::vector<DetectionVerdict> sweep = outcome.verdicts;
  std::stable_sort(sweep.begin(), sweep.end(),
                   [](const DetectionVerdict& a, const DetectionVerdict& b) { return a.confidence > b.confidence; });

  PrCurve curve;
  curve.points.reserve(sweep.size());
  std::size_t tp = 0;
  std::size_t fp = 0;
  const double total = static_cast<double>(outcome.total_gt);
  for (const auto& v : sweep) {
    (v.is_tp ? tp : fp) += 1;
    curve.points.push_back({static_cast<double>(tp) / total,
                            static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }

  // Right-to-left running max makes precision non-increasing in recall.
  std::vector<double> envelope(curve.points.size());
  double running = 0.0;
  for (std::size_t i = curve.points.size(); i-- > 0;) {
    running = std::max(running, curve.points[i].precision);
    envelope[i] = running;
  }

  double sum = 0.0;
  std::size_t cursor = 0;
  for (int s = 0; s < kRecallSamples; ++s) {
    const double r = static_cast<double>(s) / (kRecallSamples - 1);
    while (cursor < curve.points.size() && curve.points[cursor].recall < r) ++cursor;
    if (cursor == curve.points.size()) break;
    sum += envelope[cursor];
  }
  curve.ap = sum / kRecallSamples;
  return curve;
}

std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return t;
}

MapResult map_at(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                 const std::vector<double>& thresholds) {
  if (thresholds.empty()) throw DomainError("at least one IoU threshold is required");
  if (gts.empty()) throw DomainError("mAP is undefined without ground truth");

  std::map<int, std::pair<std::vector<Detection>, std::vector<GroundTruth>>> by_class;
  for (const auto& g : gts) by_class[g.class_id].second.push_back(g);
  for (const auto& d : dets) {
    auto it = by_class.find(d.class_id);
    if (it != by_class.end()) {
      it->second.first.push_back(d);
    } else {
      validate_detection(d);
    }
  }

  MapResult result;
  double total = 0.0;
  for (double thr : thresholds) {
    double class_sum = 0.0;
    for (const auto& [cls, pair] : by_class) class_sum += pr_curve(match(pair.first, pair.second, thr)).ap;
    const double ap = class_sum / static_cast<double>(by_class.size());
    result.per_threshold.push_back({thr, ap});
    total += ap;
  }
  result.mean = total / static_cast<double>(thresholds.size());
  return result;
}

EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double iou_thr,
                    std::size_t max_det) {
  if (gts.empty()) throw DomainError("evaluation needs at least one ground-truth box");
  const std::vector<Detection> capped = cap_detections(dets, max_det);

  EvalReport report;
  report.iou_threshold = iou_thr;
  report.max_detections = max_det;

  const MatchOutcome outcome = match(capped, gts, iou_thr);
  report.counts = {outcome.tp_count(), outcome.fp_count(), outcome.fn_count};
  const auto prf = precision_recall_f1(report.counts.tp, report.counts.fp, report.counts.fn);
  report.precision = prf.precision;
  report.recall = prf.recall;
  report.f1 = prf.f1;

  const MapResult coco = map_at(capped, gts, coco_thresholds());
  report.per_threshold_ap = coco.per_threshold;
  report.map50 = coco.per_threshold.front().ap;
  report.map50_95 = coco.mean;
  return report;
}

}  // namespace polygate
