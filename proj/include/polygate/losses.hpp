#pragma once

#include <vector>

#include "polygate/geometry.hpp"

namespace polygate {

/// Multipliers of the three loss components in the total loss.
struct LossWeights {
  double lambda_box = 7.5;
  double lambda_cls = 0.5;
  double lambda_dfl = 1.5;

  bool valid() const noexcept;
};

/// Parallel labels, probabilities, and positive-term weights for weighted BCE.
struct ClsBatch {
  std::vector<int> y;
  std::vector<double> p;
  std::vector<double> w;
};

/// Parallel weights and coordinate pairs for the weighted L1 localization term.
struct DflBatch {
  std::vector<double> p;
  std::vector<double> x_pred;
  std::vector<double> x_gt;
};

inline constexpr double kProbabilityEpsilon = 1e-7;

/// Individual CIoU terms, exposed for inspection and reporting.
struct CiouTerms {
  double iou = 0.0;
  double center_distance_sq = 0.0;  // rho^2
  double enclosing_diagonal_sq = 0.0;  // c^2
  double aspect = 0.0;  // v
  double alpha = 0.0;
  double loss = 0.0;
};

CiouTerms ciou_terms(const BBox& pred, const BBox& gt);

/// 1 - IoU + rho^2/c^2 + alpha*v. Throws DomainError on a degenerate box.
double box_loss(const BBox& pred, const BBox& gt);

/// -sum_j [w_j y_j log p_j + (1 - y_j) log(1 - p_j)], p clamped to [eps, 1-eps].
/// The weight scales the positive term only. Empty batch gives 0.
double cls_loss(const ClsBatch& batch);

/// sum_j p_j |x_pred_j - x_gt_j|.
double dfl_loss(const DflBatch& batch);

double total_loss(double box, double cls, double dfl, const LossWeights& weights = {});

}  // namespace polygate
