#pragma once

#include <optional>
#include <string>
#include <vector>

#include "roigd/geometry.hpp"

namespace roigd {

struct ScoredGrasp {
  OrientedRect rect;
  double score = 0.0;
};

// One detected object with its grasp candidates.
struct DetectionRecord {
  std::string image_id;
  std::string category;
  double score = 0.0;
  AxisAlignedBox bbox;
  std::vector<ScoredGrasp> grasps;

  // Max-score candidate, ties resolved to the first; nullopt when empty.
  std::optional<ScoredGrasp> top1_grasp() const;
};

// Detection interchange file: one JSON record per line,
//   {"image_id": ..., "detections": [{"category": ..., "score": ...,
//     "bbox": [x0, y0, x1, y1],
//     "grasps": [{"rect": [x, y, w, h, theta], "score": ...}]}]}
std::vector<DetectionRecord> parse_detection_file(const std::string& text,
                                                  const std::string& filename = "<det>");

// Groups records by image_id in first-appearance order; deterministic.
std::string write_detection_file(const std::vector<DetectionRecord>& records);

}  // namespace roigd
