#include "roigd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "roigd/io_util.hpp"
#include "roigd/parallel.hpp"

namespace roigd {

namespace {

bool grasp_gate(const ScoredGrasp& top1, const ObjectAnnotation& obj,
                const SceneAnnotation& scene, const EvalParams& p) {
  for (const auto& g : scene.grasps) {
    if (g.owner_index != obj.index) continue;
    if (p.ignore_hard && g.hard) continue;
    if (rotated_iou(top1.rect, g.rect) > p.jaccard_thresh &&
        angle_distance(top1.rect.theta, g.rect.theta) < p.angle_thresh_deg) {
      return true;
    }
  }
  return false;
}

struct Outcome {
  double score = 0.0;
  bool tp = false;
  const DetectionRecord* det = nullptr;
};

// Per-detection verdicts with all detections present: greedy adjudication is
// prefix-stable, so the verdict of a detection is the same at every score
// threshold that keeps it.
struct Pipeline {
  std::vector<Outcome> outcomes;  // in detection input order
  std::size_t n_images = 0;
  std::size_t total_gt = 0;
  std::map<std::string, std::size_t> gt_per_category;
};

Pipeline run_pipeline(const std::vector<DetectionRecord>& detections,
                      const std::vector<SceneAnnotation>& scenes,
                      const EvalParams& params) {
  Pipeline pl;
  pl.n_images = scenes.size();
  std::unordered_map<std::string, std::size_t> scene_of;
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    if (!scene_of.emplace(scenes[s].image_id, s).second) {
      throw ValidationError("duplicate scene image_id '" + scenes[s].image_id + "'");
    }
    pl.total_gt += scenes[s].objects.size();
    for (const auto& obj : scenes[s].objects) ++pl.gt_per_category[obj.category];
  }
  if (pl.total_gt == 0) {
    throw ValidationError("evaluation requires at least one ground-truth object");
  }

  std::vector<std::size_t> kept;  // indices into detections, input order
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (detections[d].grasps.empty()) {
      throw MissingGrasp("detection " + std::to_string(d) + " on image '" +
                         detections[d].image_id + "' has no grasp candidates");
    }
    if (scene_of.find(detections[d].image_id) == scene_of.end()) {
      throw ValidationError("detection references unknown image '" +
                            detections[d].image_id + "'");
    }
    if (detections[d].score >= params.score_floor) kept.push_back(d);
  }

  std::vector<std::vector<std::size_t>> per_scene(scenes.size());
  for (std::size_t pos = 0; pos < kept.size(); ++pos) {
    per_scene[scene_of[detections[kept[pos]].image_id]].push_back(pos);
  }

  pl.outcomes.resize(kept.size());
  parallel_for(scenes.size(), params.jobs, [&](std::size_t s) {
    auto order = per_scene[s];
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return detections[kept[a]].score > detections[kept[b]].score;
    });
    std::vector<bool> used(scenes[s].objects.size(), false);
    for (const std::size_t pos : order) {
      const DetectionRecord& det = detections[kept[pos]];
      const Verdict v = adjudicate(det, scenes[s], used, params);
      pl.outcomes[pos] = {det.score, v == Verdict::tp, &det};
    }
  });
  return pl;
}

EvalCurve curve_from_pipeline(const Pipeline& pl) {
  std::set<double> thresholds;
  for (const auto& o : pl.outcomes) thresholds.insert(o.score);

  std::vector<const Outcome*> by_score;
  by_score.reserve(pl.outcomes.size());
  for (const auto& o : pl.outcomes) by_score.push_back(&o);
  std::stable_sort(by_score.begin(), by_score.end(),
                   [](const Outcome* a, const Outcome* b) { return a->score > b->score; });
  std::vector<std::size_t> tp_prefix(by_score.size() + 1, 0);
  for (std::size_t i = 0; i < by_score.size(); ++i) {
    tp_prefix[i + 1] = tp_prefix[i] + (by_score[i]->tp ? 1 : 0);
  }

  EvalCurve curve;
  for (const double tau : thresholds) {
    const auto it = std::partition_point(
        by_score.begin(), by_score.end(),
        [tau](const Outcome* o) { return o->score >= tau; });
    const auto n = static_cast<std::size_t>(it - by_score.begin());
    const std::size_t tp = tp_prefix[n];
    const std::size_t fp = n - tp;
    curve.points.push_back({tau,
                            static_cast<double>(fp) / static_cast<double>(pl.n_images),
                            1.0 - static_cast<double>(tp) /
                                      static_cast<double>(pl.total_gt)});
  }
  curve.points.push_back({std::numeric_limits<double>::infinity(),
                          0.0 / static_cast<double>(pl.n_images),
                          1.0 - 0.0 / static_cast<double>(pl.total_gt)});
  return curve;
}

double ap_from_pipeline(const Pipeline& pl, const std::string& category, ApMode mode) {
  const auto it = pl.gt_per_category.find(category);
  if (it == pl.gt_per_category.end()) {
    throw UnknownCategory("no ground-truth instance of category '" + category + "'");
  }
  const double n_gt = static_cast<double>(it->second);

  std::vector<const Outcome*> ranked;
  for (const auto& o : pl.outcomes) {
    if (o.det->category == category) ranked.push_back(&o);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Outcome* a, const Outcome* b) { return a->score > b->score; });

  std::vector<double> precision(ranked.size());
  std::vector<double> recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i]->tp) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / n_gt;
  }

  if (mode == ApMode::eleven_point) {
    double sum = 0.0;
    for (int t = 0; t <= 10; ++t) {
      const double r_ref = t / 10.0;
      double pmax = 0.0;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (recall[i] >= r_ref) pmax = std::max(pmax, precision[i]);
      }
      sum += pmax;
    }
    return sum / 11.0;
  }

  std::vector<double> envelope(precision);
  for (std::size_t i = envelope.size(); i-- > 1;) {
    envelope[i - 1] = std::max(envelope[i - 1], envelope[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ap += (recall[i] - prev_recall) * envelope[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

Verdict adjudicate(const DetectionRecord& det, const SceneAnnotation& scene,
                   std::vector<bool>& used_gt, const EvalParams& params) {
  const auto top1 = det.top1_grasp();
  if (!top1) {
    throw MissingGrasp("detection on image '" + det.image_id +
                       "' has no grasp candidates");
  }
  if (used_gt.size() != scene.objects.size()) {
    throw ValidationError("used_gt size does not match the scene object count");
  }
  std::optional<std::size_t> best;
  double best_iou = 0.0;
  for (std::size_t o = 0; o < scene.objects.size(); ++o) {
    if (used_gt[o]) continue;
    const auto& obj = scene.objects[o];
    if (obj.category != det.category) continue;
    const double iou = box_iou(det.bbox, obj.bbox);
    if (!(iou > params.box_iou_thresh)) continue;
    if (!grasp_gate(*top1, obj, scene, params)) continue;
    if (!best || iou > best_iou) {
      best = o;
      best_iou = iou;
    }
  }
  if (best) {
    used_gt[*best] = true;
    return Verdict::tp;
  }
  return Verdict::fp;
}

EvalCurve fppi_missrate_curve(const std::vector<DetectionRecord>& detections,
                              const std::vector<SceneAnnotation>& scenes,
                              const EvalParams& params) {
  return curve_from_pipeline(run_pipeline(detections, scenes, params));
}

double mr_at(const EvalCurve& curve, double fppi_target) {
  bool found = false;
  double best_fppi = 0.0;
  double best_miss = 1.0;
  for (const auto& pt : curve.points) {
    if (pt.fppi > fppi_target) continue;
    if (!found || pt.fppi > best_fppi ||
        (pt.fppi == best_fppi && pt.miss_rate < best_miss)) {
      found = true;
      best_fppi = pt.fppi;
      best_miss = pt.miss_rate;
    }
  }
  return found ? best_miss : 1.0;
}

double lamr(const EvalCurve& curve) {
  if (curve.points.empty()) throw EmptyCurve("lamr: empty curve");
  double log_sum = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double ref = std::pow(10.0, -2.0 + 0.25 * i);
    const double miss = std::max(mr_at(curve, ref), 1e-10);
    log_sum += std::log(miss);
  }
  return std::exp(log_sum / 9.0);
}

double ap_with_grasp(const std::vector<DetectionRecord>& detections,
                     const std::vector<SceneAnnotation>& scenes,
                     const std::string& category, const EvalParams& params) {
  return ap_from_pipeline(run_pipeline(detections, scenes, params), category,
                          params.ap_mode);
}

double map_with_grasp(const std::vector<DetectionRecord>& detections,
                      const std::vector<SceneAnnotation>& scenes,
                      const EvalParams& params) {
  const Pipeline pl = run_pipeline(detections, scenes, params);
  double sum = 0.0;
  for (const auto& [category, count] : pl.gt_per_category) {
    sum += ap_from_pipeline(pl, category, params.ap_mode);
  }
  return sum / static_cast<double>(pl.gt_per_category.size());
}

EvalReport evaluate(const std::vector<DetectionRecord>& detections,
                    const std::vector<SceneAnnotation>& scenes,
                    const EvalParams& params) {
  const Pipeline pl = run_pipeline(detections, scenes, params);
  EvalReport report;
  report.curve = curve_from_pipeline(pl);
  report.mr0 = mr_at(report.curve, 0.0);
  report.mr_minus1 = mr_at(report.curve, 0.1);
  report.lamr = lamr(report.curve);
  double sum = 0.0;
  for (const auto& [category, count] : pl.gt_per_category) {
    const double ap = ap_from_pipeline(pl, category, params.ap_mode);
    report.per_class_ap[category] = ap;
    sum += ap;
  }
  report.map = sum / static_cast<double>(pl.gt_per_category.size());
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["mr0"] = report.mr0;
  doc["mr_minus1"] = report.mr_minus1;
  doc["lamr"] = report.lamr;
  doc["map"] = report.map;
  auto& per_class = doc["per_class_ap"] = nlohmann::ordered_json::object();
  for (const auto& [category, ap] : report.per_class_ap) per_class[category] = ap;
  return doc.dump(2) + "\n";
}

std::string curve_to_csv(const EvalCurve& curve) {
  std::string out = "threshold,fppi,miss_rate\n";
  for (const auto& pt : curve.points) {
    out += fmt_g(pt.threshold);
    out += ',';
    out += fmt_g(pt.fppi);
    out += ',';
    out += fmt_g(pt.miss_rate);
    out += '\n';
  }
  return out;
}

}  // namespace roigd
