#pragma once

#include <array>
#include <optional>
#include <vector>

#include "roigd/assignment.hpp"

namespace roigd {

// Raw grasp-head predictions for one RoI: per anchor, 5 regression offsets
// and 2 graspability logits (index 0 = ungraspable, 1 = graspable).
struct GraspHeadOutput {
  std::vector<GraspOffsets> offsets;
  std::vector<std::array<double, 2>> logits;
};

struct GraspLoss {
  double reg = 0.0;
  double cls = 0.0;
  double total() const { return reg + cls; }
};

struct GraspLossGradient {
  std::vector<GraspOffsets> d_offsets;
  std::vector<std::array<double, 2>> d_logits;
};

struct LossBreakdown {
  double grasp_reg = 0.0;
  double grasp_cls = 0.0;
  double object_loss = 0.0;
  double total = 0.0;
};

struct GraspLossOptions {
  // When set, caps negatives so positives make up at least this fraction of
  // the classification term; the first negatives by anchor index are kept.
  std::optional<double> positive_fraction;
};

double smooth_l1(double e);
double smooth_l1_grad(double e);

// reg: mean over graspable anchors of the 5-component smooth-L1 between
// predicted and target offsets. cls: mean softmax cross-entropy over
// non-ignored anchors. Throws ShapeMismatch when sizes disagree.
GraspLoss grasp_loss(const GraspHeadOutput& pred,
                     const std::vector<AnchorTarget>& targets,
                     const GraspLossOptions& opts = {});

// Hand-derived gradients of grasp_loss's total (reg + cls) with respect to
// predicted offsets and logits; meant as a cross-check for training code.
GraspLossGradient grasp_loss_gradient(const GraspHeadOutput& pred,
                                      const std::vector<AnchorTarget>& targets,
                                      const GraspLossOptions& opts = {});

// Multi-task total: object_loss + (1 / n_roi) * sum(per-RoI grasp losses).
// n_roi == 0 with an empty list degenerates to object_loss alone.
double total_loss(double object_loss, const std::vector<double>& per_roi_grasp_losses,
                  std::size_t n_roi);

LossBreakdown total_loss_breakdown(double object_loss,
                                   const std::vector<GraspLoss>& per_roi,
                                   std::size_t n_roi);

}  // namespace roigd
