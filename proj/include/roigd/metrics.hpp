#pragma once

#include <map>
#include <string>
#include <vector>

#include "roigd/dataset.hpp"
#include "roigd/detection.hpp"

namespace roigd {

enum class ApMode { all_point, eleven_point };

struct EvalParams {
  double box_iou_thresh = 0.5;     // gt object box gate (strict >)
  double jaccard_thresh = 0.25;    // grasp rotated-IoU gate (strict >)
  double angle_thresh_deg = 30.0;  // grasp angle gate (strict <)
  bool ignore_hard = false;        // drop hard grasps as match targets
  double score_floor = 0.0;        // detections with score < floor are dropped
  ApMode ap_mode = ApMode::all_point;
  unsigned jobs = 1;
};

enum class Verdict { tp, fp };

// A detection is TP when an unused gt object of the same category overlaps
// its box above box_iou_thresh and the Top-1 grasp clears the Jaccard and
// angle gates against at least one grasp owned by that object. Among
// qualifying objects the max-box-IoU one is matched and marked used.
// Call in descending score order per scene. Throws MissingGrasp when the
// detection has no grasp candidates.
Verdict adjudicate(const DetectionRecord& det, const SceneAnnotation& scene,
                   std::vector<bool>& used_gt, const EvalParams& params = {});

struct CurvePoint {
  double threshold = 0.0;
  double fppi = 0.0;
  double miss_rate = 1.0;
};

// Points sorted by ascending threshold; the final point is the empty
// operating point (threshold +inf, fppi 0), so a zero-FP point always exists.
struct EvalCurve {
  std::vector<CurvePoint> points;
};

struct EvalReport {
  EvalCurve curve;
  double mr0 = 1.0;
  double mr_minus1 = 1.0;
  double lamr = 1.0;
  std::map<std::string, double> per_class_ap;
  double map = 0.0;
};

// Sweeps the score threshold over all distinct detection scores; at each
// threshold detections with score >= threshold are adjudicated per image.
EvalCurve fppi_missrate_curve(const std::vector<DetectionRecord>& detections,
                              const std::vector<SceneAnnotation>& scenes,
                              const EvalParams& params = {});

// Miss rate at the operating point with the largest fppi <= fppi_target
// (ties resolved to the lowest miss rate); 1.0 when no point qualifies.
double mr_at(const EvalCurve& curve, double fppi_target);

// Geometric mean of the miss rate sampled at 9 log-spaced FPPI references
// in [1e-2, 1]; samples are floored at 1e-10 before the log. Throws
// EmptyCurve on an empty curve.
double lamr(const EvalCurve& curve);

// VOC-style AP over the category's detections ranked by score across all
// images, using the same TP criteria. Throws UnknownCategory when the
// category has no gt instance.
double ap_with_grasp(const std::vector<DetectionRecord>& detections,
                     const std::vector<SceneAnnotation>& scenes,
                     const std::string& category, const EvalParams& params = {});

// Unweighted mean AP over categories with at least one gt instance.
double map_with_grasp(const std::vector<DetectionRecord>& detections,
                      const std::vector<SceneAnnotation>& scenes,
                      const EvalParams& params = {});

EvalReport evaluate(const std::vector<DetectionRecord>& detections,
                    const std::vector<SceneAnnotation>& scenes,
                    const EvalParams& params = {});

std::string report_to_json(const EvalReport& report);
std::string curve_to_csv(const EvalCurve& curve);

}  // namespace roigd
