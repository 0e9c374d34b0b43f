#include "roigd/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace roigd {

std::vector<RoiMatch> match_rois(const std::vector<AxisAlignedBox>& rois,
                                 const std::vector<ObjectAnnotation>& objects,
                                 double iou_gate) {
  std::vector<RoiMatch> matches;
  matches.reserve(rois.size());
  for (std::size_t r = 0; r < rois.size(); ++r) {
    RoiMatch m;
    m.roi_index = r;
    for (std::size_t o = 0; o < objects.size(); ++o) {
      const double iou = box_iou(rois[r], objects[o].bbox);
      if (iou > iou_gate && (!m.object_pos || iou > m.iou)) {
        m.object_pos = o;
        m.iou = iou;
      }
    }
    matches.push_back(m);
  }
  return matches;
}

std::vector<GraspAnnotation> roi_ground_truth(const RoiMatch& match,
                                              const SceneAnnotation& scene) {
  std::vector<GraspAnnotation> gt;
  if (!match.object_pos) return gt;
  const int owner = scene.objects.at(*match.object_pos).index;
  for (const auto& g : scene.grasps) {
    if (g.owner_index == owner) gt.push_back(g);
  }
  return gt;
}

std::vector<AnchorTarget> anchor_targets(const AnchorGrid& grid,
                                         const std::vector<GraspAnnotation>& gt,
                                         bool include_hard) {
  const auto& spec = grid.spec;
  std::vector<AnchorTarget> targets(grid.size());
  for (std::size_t a = 0; a < targets.size(); ++a) targets[a].anchor_index = a;

  const double cell_w = grid.roi.width() / spec.grid_w;
  const double cell_h = grid.roi.height() / spec.grid_h;
  std::vector<char> cell_occupied(static_cast<std::size_t>(spec.grid_w) * spec.grid_h, 0);

  for (const auto& grasp : gt) {
    if (grasp.hard && !include_hard) continue;
    const double cx = grasp.rect.x;
    const double cy = grasp.rect.y;
    if (cx < grid.roi.x_min || cx > grid.roi.x_max || cy < grid.roi.y_min ||
        cy > grid.roi.y_max) {
      throw GraspOutsideRoi("grasp center (" + std::to_string(cx) + ", " +
                            std::to_string(cy) + ") outside the RoI");
    }
    // boundary-inclusive: centers on the max edge belong to the last cell
    int i = static_cast<int>(std::floor((cx - grid.roi.x_min) / cell_w));
    int j = static_cast<int>(std::floor((cy - grid.roi.y_min) / cell_h));
    i = std::clamp(i, 0, spec.grid_w - 1);
    j = std::clamp(j, 0, spec.grid_h - 1);
    cell_occupied[static_cast<std::size_t>(j) * spec.grid_w + i] = 1;

    int best_m = 0;
    double best_dist = angle_distance(grasp.rect.theta, anchor_angle(0, spec.k));
    for (int m = 1; m < spec.k; ++m) {
      const double d = angle_distance(grasp.rect.theta, anchor_angle(m, spec.k));
      if (d < best_dist) {
        best_dist = d;
        best_m = m;
      }
    }
    const std::size_t idx = grid.flat_index(i, j, best_m);
    targets[idx].label = AnchorLabel::graspable;
    targets[idx].offsets = encode(grasp.rect, grid.anchors[idx], spec.k);
  }

  for (int j = 0; j < spec.grid_h; ++j) {
    for (int i = 0; i < spec.grid_w; ++i) {
      if (!cell_occupied[static_cast<std::size_t>(j) * spec.grid_w + i]) continue;
      for (int m = 0; m < spec.k; ++m) {
        auto& t = targets[grid.flat_index(i, j, m)];
        if (t.label != AnchorLabel::graspable) t.label = AnchorLabel::ignore;
      }
    }
  }
  return targets;
}

namespace {

double center_distance(const AxisAlignedBox& box, const OrientedRect& rect) {
  const Vec2 c = box.center();
  return std::hypot(rect.x - c.x, rect.y - c.y);
}

}  // namespace

std::vector<std::optional<std::size_t>> baseline_assign(
    const std::vector<AxisAlignedBox>& object_boxes,
    const std::vector<ScoredGrasp>& grasps, double min_score) {
  std::vector<std::optional<std::size_t>> out(object_boxes.size());
  for (std::size_t o = 0; o < object_boxes.size(); ++o) {
    double best_dist = 0.0;
    for (std::size_t g = 0; g < grasps.size(); ++g) {
      if (!(grasps[g].score > min_score)) continue;
      const double d = center_distance(object_boxes[o], grasps[g].rect);
      if (!out[o] || d < best_dist) {
        out[o] = g;
        best_dist = d;
      }
    }
  }
  return out;
}

std::optional<ScoredGrasp> select_execution_grasp(const DetectionRecord& target,
                                                  double min_score) {
  std::optional<ScoredGrasp> best;
  double best_dist = 0.0;
  for (const auto& g : target.grasps) {
    if (!(g.score > min_score)) continue;
    const double d = center_distance(target.bbox, g.rect);
    if (!best || d < best_dist) {
      best = g;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace roigd
