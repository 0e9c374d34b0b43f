#include "roigd/losses.hpp"

#include <algorithm>
#include <cmath>

namespace roigd {

namespace {

struct Selection {
  std::vector<std::size_t> positives;  // graspable anchors
  std::vector<std::size_t> labeled;    // classification participants
};

Selection select_anchors(const GraspHeadOutput& pred,
                         const std::vector<AnchorTarget>& targets,
                         const GraspLossOptions& opts) {
  if (pred.offsets.size() != pred.logits.size() ||
      targets.size() != pred.offsets.size()) {
    throw ShapeMismatch("grasp_loss: prediction and target sizes disagree");
  }
  Selection sel;
  std::vector<std::size_t> negatives;
  for (std::size_t a = 0; a < targets.size(); ++a) {
    if (targets[a].anchor_index != a) {
      throw ShapeMismatch("grasp_loss: targets not positionally aligned");
    }
    switch (targets[a].label) {
      case AnchorLabel::graspable:
        if (!targets[a].offsets) {
          throw ShapeMismatch("grasp_loss: graspable target without offsets");
        }
        sel.positives.push_back(a);
        break;
      case AnchorLabel::ungraspable:
        negatives.push_back(a);
        break;
      case AnchorLabel::ignore:
        break;
    }
  }
  if (opts.positive_fraction && !sel.positives.empty()) {
    const double p = *opts.positive_fraction;
    if (!(p > 0.0) || p > 1.0) {
      throw InvalidCount("positive_fraction must lie in (0, 1]");
    }
    const auto cap = static_cast<std::size_t>(
        std::floor(sel.positives.size() * (1.0 - p) / p));
    if (negatives.size() > cap) negatives.resize(cap);
  }
  sel.labeled = sel.positives;
  sel.labeled.insert(sel.labeled.end(), negatives.begin(), negatives.end());
  std::sort(sel.labeled.begin(), sel.labeled.end());
  return sel;
}

std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
  const double m = std::max(logits[0], logits[1]);
  const double e0 = std::exp(logits[0] - m);
  const double e1 = std::exp(logits[1] - m);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

}  // namespace

double smooth_l1(double e) {
  const double a = std::abs(e);
  return a < 1.0 ? 0.5 * e * e : a - 0.5;
}

double smooth_l1_grad(double e) {
  return std::abs(e) < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0);
}

GraspLoss grasp_loss(const GraspHeadOutput& pred,
                     const std::vector<AnchorTarget>& targets,
                     const GraspLossOptions& opts) {
  const Selection sel = select_anchors(pred, targets, opts);
  GraspLoss loss;
  if (!sel.positives.empty()) {
    double sum = 0.0;
    for (const std::size_t a : sel.positives) {
      const GraspOffsets& p = pred.offsets[a];
      const GraspOffsets& t = *targets[a].offsets;
      sum += smooth_l1(p.tx - t.tx) + smooth_l1(p.ty - t.ty) +
             smooth_l1(p.tw - t.tw) + smooth_l1(p.th - t.th) +
             smooth_l1(p.ttheta - t.ttheta);
    }
    loss.reg = sum / static_cast<double>(sel.positives.size());
  }
  if (!sel.labeled.empty()) {
    double sum = 0.0;
    for (const std::size_t a : sel.labeled) {
      const auto probs = softmax2(pred.logits[a]);
      const int y = targets[a].label == AnchorLabel::graspable ? 1 : 0;
      sum += -std::log(std::max(probs[y], 1e-300));
    }
    loss.cls = sum / static_cast<double>(sel.labeled.size());
  }
  return loss;
}

GraspLossGradient grasp_loss_gradient(const GraspHeadOutput& pred,
                                      const std::vector<AnchorTarget>& targets,
                                      const GraspLossOptions& opts) {
  const Selection sel = select_anchors(pred, targets, opts);
  GraspLossGradient grad;
  grad.d_offsets.assign(pred.offsets.size(), GraspOffsets{});
  grad.d_logits.assign(pred.logits.size(), {0.0, 0.0});
  if (!sel.positives.empty()) {
    const double inv_n = 1.0 / static_cast<double>(sel.positives.size());
    for (const std::size_t a : sel.positives) {
      const GraspOffsets& p = pred.offsets[a];
      const GraspOffsets& t = *targets[a].offsets;
      grad.d_offsets[a] = {smooth_l1_grad(p.tx - t.tx) * inv_n,
                           smooth_l1_grad(p.ty - t.ty) * inv_n,
                           smooth_l1_grad(p.tw - t.tw) * inv_n,
                           smooth_l1_grad(p.th - t.th) * inv_n,
                           smooth_l1_grad(p.ttheta - t.ttheta) * inv_n};
    }
  }
  if (!sel.labeled.empty()) {
    const double inv_n = 1.0 / static_cast<double>(sel.labeled.size());
    for (const std::size_t a : sel.labeled) {
      const auto probs = softmax2(pred.logits[a]);
      const int y = targets[a].label == AnchorLabel::graspable ? 1 : 0;
      grad.d_logits[a][0] = (probs[0] - (y == 0 ? 1.0 : 0.0)) * inv_n;
      grad.d_logits[a][1] = (probs[1] - (y == 1 ? 1.0 : 0.0)) * inv_n;
    }
  }
  return grad;
}

double total_loss(double object_loss, const std::vector<double>& per_roi_grasp_losses,
                  std::size_t n_roi) {
  if (per_roi_grasp_losses.empty()) {
    if (n_roi != 0) {
      throw InvalidCount("total_loss: n_roi must be 0 for an empty loss list");
    }
    return object_loss;
  }
  if (n_roi != per_roi_grasp_losses.size()) {
    throw InvalidCount("total_loss: n_roi does not match the per-RoI loss count");
  }
  double sum = 0.0;
  for (const double l : per_roi_grasp_losses) sum += l;
  return object_loss + sum / static_cast<double>(n_roi);
}

LossBreakdown total_loss_breakdown(double object_loss,
                                   const std::vector<GraspLoss>& per_roi,
                                   std::size_t n_roi) {
  LossBreakdown b;
  b.object_loss = object_loss;
  if (!per_roi.empty()) {
    if (n_roi != per_roi.size()) {
      throw InvalidCount("total_loss_breakdown: n_roi mismatch");
    }
    double reg = 0.0;
    double cls = 0.0;
    for (const auto& l : per_roi) {
      reg += l.reg;
      cls += l.cls;
    }
    const double lambda = 1.0 / static_cast<double>(n_roi);
    b.grasp_reg = reg * lambda;
    b.grasp_cls = cls * lambda;
  } else if (n_roi != 0) {
    throw InvalidCount("total_loss_breakdown: n_roi must be 0 for an empty list");
  }
  b.total = b.object_loss + b.grasp_reg + b.grasp_cls;
  return b;
}

}  // namespace roigd
