#pragma once

#include <string>
#include <vector>

#include "roigd/detection.hpp"

namespace roigd {

struct ScoredBox {
  AxisAlignedBox box;
  std::string category;
  double score = 0.0;
};

// Greedy non-maximum suppression over oriented grasps: descending score
// (ties keep input order), a candidate is dropped when its rotated_iou with
// any kept grasp exceeds iou_threshold. Output sorted by score descending.
std::vector<ScoredGrasp> nms_grasps(const std::vector<ScoredGrasp>& candidates,
                                    double iou_threshold);

// Same contract with box_iou, applied per category.
std::vector<ScoredBox> nms_boxes(const std::vector<ScoredBox>& candidates,
                                 double iou_threshold);

// Index-returning variants (kept order = descending score).
std::vector<std::size_t> nms_grasps_keep(const std::vector<ScoredGrasp>& candidates,
                                         double iou_threshold);
std::vector<std::size_t> nms_boxes_keep(const std::vector<ScoredBox>& candidates,
                                        double iou_threshold);

}  // namespace roigd
