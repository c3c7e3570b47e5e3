#include "polygate/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "polygate/error.hpp"

namespace polygate {

bool LossWeights::valid() const noexcept {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  return ok(lambda_box) && ok(lambda_cls) && ok(lambda_dfl);
}

CiouTerms ciou_terms(const BBox& pred, const BBox& gt) {
  require_valid(pred);
  require_valid(gt);
  CiouTerms t;
  t.iou = iou(pred, gt);

  const double dx = pred.center_x() - gt.center_x();
  const double dy = pred.center_y() - gt.center_y();
  t.center_distance_sq = dx * dx + dy * dy;

  const double cw = std::max(pred.x_max, gt.x_max) - std::min(pred.x_min, gt.x_min);
  const double ch = std::max(pred.y_max, gt.y_max) - std::min(pred.y_min, gt.y_min);
  t.enclosing_diagonal_sq = cw * cw + ch * ch;

  const double dtheta = std::atan(gt.width() / gt.height()) - std::atan(pred.width() / pred.height());
  t.aspect = 4.0 / (std::numbers::pi * std::numbers::pi) * dtheta * dtheta;
  t.alpha = t.aspect == 0.0 ? 0.0 : t.aspect / ((1.0 - t.iou) + t.aspect);

  t.loss = 1.0 - t.iou + t.center_distance_sq / t.enclosing_diagonal_sq + t.alpha * t.aspect;
  t.loss = std::max(0.0, t.loss);
  return t;
}

double box_loss(const BBox& pred, const BBox& gt) { return ciou_terms(pred, gt).loss; }

double cls_loss(const ClsBatch& batch) {
  const std::size_t m = batch.y.size();
  if (batch.p.size() != m || batch.w.size() != m) throw DomainError("classification batch lengths differ");
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const int y = batch.y[j];
    if (y != 0 && y != 1) throw DomainError("classification label must be 0 or 1");
    if (!std::isfinite(batch.p[j])) throw DomainError("probability must be finite");
    if (!(std::isfinite(batch.w[j]) && batch.w[j] > 0.0)) throw DomainError("class weight must be > 0");
    const double p = std::clamp(batch.p[j], kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    sum += y == 1 ? batch.w[j] * std::log(p) : std::log(1.0 - p);
  }
  return 0.0 - sum;
}

double dfl_loss(const DflBatch& batch) {
  const std::size_t m = batch.p.size();
  if (batch.x_pred.size() != m || batch.x_gt.size() != m) throw DomainError("localization batch lengths differ");
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double p = batch.p[j];
    if (!(std::isfinite(p) && p >= 0.0)) throw DomainError("localization weight must be finite and >= 0");
    if (!std::isfinite(batch.x_pred[j]) || !std::isfinite(batch.x_gt[j])) {
      throw DomainError("coordinates must be finite");
    }
    sum += p * std::abs(batch.x_pred[j] - batch.x_gt[j]);
  }
  return sum;
}

double total_loss(double box, double cls, double dfl, const LossWeights& weights) {
  if (!weights.valid()) throw DomainError("loss weights must be finite and >= 0");
  if (!std::isfinite(box) || !std::isfinite(cls) || !std::isfinite(dfl)) {
    throw DomainError("loss components must be finite");
  }
  return weights.lambda_box * box + weights.lambda_cls * cls + weights.lambda_dfl * dfl;
}

}  // namespace polygate
