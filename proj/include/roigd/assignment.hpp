#pragma once

#include <optional>
#include <vector>

#include "roigd/anchor.hpp"
#include "roigd/dataset.hpp"
#include "roigd/detection.hpp"

namespace roigd {

// RoI -> ground-truth object match. object_pos indexes the objects list
// handed to match_rois; set only when the best IoU exceeds the gate.
struct RoiMatch {
  std::size_t roi_index = 0;
  std::optional<std::size_t> object_pos;
  double iou = 0.0;
};

// Candidates are objects with box_iou strictly above iou_gate; the match is
// the argmax-IoU candidate, ties broken toward the lower object position.
std::vector<RoiMatch> match_rois(const std::vector<AxisAlignedBox>& rois,
                                 const std::vector<ObjectAnnotation>& objects,
                                 double iou_gate = 0.5);

// Exactly the grasps owned by the matched object; empty when unmatched.
std::vector<GraspAnnotation> roi_ground_truth(const RoiMatch& match,
                                              const SceneAnnotation& scene);

enum class AnchorLabel { ungraspable, graspable, ignore };

struct AnchorTarget {
  std::size_t anchor_index = 0;
  AnchorLabel label = AnchorLabel::ungraspable;
  std::optional<GraspOffsets> offsets;  // present iff graspable
};

// One target per anchor, positionally aligned with grid.anchors. Each grasp
// claims the cell containing its center; within the cell the anchor with
// minimal angle_distance becomes graspable (ties toward the lower
// orientation index, later grasps overwrite earlier ones); remaining anchors
// of occupied cells are ignore, all other anchors ungraspable.
// Throws GraspOutsideRoi when a grasp center falls outside the RoI.
std::vector<AnchorTarget> anchor_targets(const AnchorGrid& grid,
                                         const std::vector<GraspAnnotation>& gt,
                                         bool include_hard = true);

// Per object box, the center-closest grasp among those with score strictly
// above min_score; grasps may serve several objects. Returns indices into
// the grasp list.
std::vector<std::optional<std::size_t>> baseline_assign(
    const std::vector<AxisAlignedBox>& object_boxes,
    const std::vector<ScoredGrasp>& grasps, double min_score = 0.25);

// Execution rule: candidate closest to the detection's box center with
// score strictly above min_score.
std::optional<ScoredGrasp> select_execution_grasp(const DetectionRecord& target,
                                                  double min_score = 0.5);

}  // namespace roigd
