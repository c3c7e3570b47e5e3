#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polygate/geometry.hpp"

namespace polygate {

struct Detection {
  std::string image_id;
  int class_id = 0;
  BBox box;
  double confidence = 0.0;
};

struct GroundTruth {
  std::string image_id;
  int class_id = 0;
  BBox box;
};

/// Verdict for one detection. `detection` indexes the list passed to `match`.
struct DetectionVerdict {
  std::size_t detection = 0;
  double confidence = 0.0;
  bool is_tp = false;
  std::optional<std::size_t> matched_gt;  // index into the ground-truth list
};

struct MatchOutcome {
  std::vector<DetectionVerdict> verdicts;  // descending confidence, ties in input order
  std::size_t total_gt = 0;
  std::size_t fn_count = 0;

  std::size_t tp_count() const noexcept;
  std::size_t fp_count() const noexcept { return verdicts.size() - tp_count(); }
};

inline constexpr std::size_t kDefaultMaxDetections = 300;

/// Keeps the `max_det` highest-confidence detections of every image (stable on ties).
std::vector<Detection> cap_detections(const std::vector<Detection>& dets, std::size_t max_det);

/// Greedy one-to-one matching in descending confidence order. Each detection
/// takes the unmatched same-image same-class ground truth with the highest
/// IoU >= iou_thr (lowest index on ties). Throws DomainError unless 0 < iou_thr < 1.
MatchOutcome match(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts, double iou_thr);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// 0/0 is defined as 0 for each ratio.
PrecisionRecallF1 precision_recall_f1(std::size_t tp, std::size_t fp, std::size_t fn);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per detection, descending confidence
  double ap = 0.0;
};

inline constexpr int kRecallSamples = 101;

/// Sweeps the outcome, builds the precision envelope, and averages it at recall
/// 0.00, 0.01, ..., 1.00. Throws DomainError when the outcome has no ground truth.
PrCurve pr_curve(const MatchOutcome& outcome);

struct ThresholdAp {
  double iou = 0.0;
  double ap = 0.0;
};

struct MapResult {
  std::vector<ThresholdAp> per_threshold;
  double mean = 0.0;
};

/// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();

/// AP per threshold (averaged over classes with ground truth) and the mean over thresholds.
MapResult map_at(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                 const std::vector<double>& thresholds);

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
  std::vector<ThresholdAp> per_threshold_ap;
  MatchCounts counts;
  double iou_threshold = 0.5;
  std::size_t max_detections = kDefaultMaxDetections;
};

/// Full metric set. The scalar precision/recall/F1 row counts every capped
/// detection at `iou_thr`. Throws DomainError when there is no ground truth.
EvalReport evaluate(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                    double iou_thr = 0.5, std::size_t max_det = kDefaultMaxDetections);

}  // namespace polygate
