#pragma once

#include <cstdint>

#include "roigd/metrics.hpp"
#include "roigd/nms.hpp"

namespace roigd {

// Brute-force reference implementations, written independently of the
// modules they check. Test/validation use only: everything here favors
// obviousness over speed.

// Recomputes the full evaluation by enumerating every score threshold and
// re-running greedy matching from scratch at each one.
EvalReport oracle_metrics(const std::vector<DetectionRecord>& detections,
                          const std::vector<SceneAnnotation>& scenes,
                          const EvalParams& params = {});

// Literal greedy NMS: repeatedly take the best remaining candidate and
// erase everything it suppresses.
std::vector<ScoredGrasp> oracle_nms_grasps(const std::vector<ScoredGrasp>& candidates,
                                           double iou_threshold);
std::vector<ScoredBox> oracle_nms_boxes(const std::vector<ScoredBox>& candidates,
                                        double iou_threshold);

// Monte-Carlo IoU estimate by sampling the union's bounding box.
double monte_carlo_iou(const OrientedRect& a, const OrientedRect& b,
                       std::size_t samples, std::uint64_t seed);

}  // namespace roigd
