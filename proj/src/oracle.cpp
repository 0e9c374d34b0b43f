#include "roigd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace roigd {

namespace {

// Everything below re-states the evaluation rules from scratch; it shares
// only the geometry primitives with the production path.

bool ref_grasp_ok(const ScoredGrasp& top1, int owner_index,
                  const SceneAnnotation& scene, const EvalParams& p) {
  for (const auto& g : scene.grasps) {
    if (g.owner_index != owner_index) continue;
    if (p.ignore_hard && g.hard) continue;
    const double jaccard = rotated_iou(top1.rect, g.rect);
    const double dtheta = angle_distance(top1.rect.theta, g.rect.theta);
    if (jaccard > p.jaccard_thresh && dtheta < p.angle_thresh_deg) return true;
  }
  return false;
}

ScoredGrasp ref_top1(const DetectionRecord& det) {
  if (det.grasps.empty()) {
    throw MissingGrasp("oracle: detection without grasp candidates");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < det.grasps.size(); ++i) {
    if (det.grasps[i].score > det.grasps[best].score) best = i;
  }
  return det.grasps[best];
}

// Greedy matching of one image's detections (already ordered by descending
// score); returns per-detection TP flags.
std::vector<bool> ref_adjudicate_image(const std::vector<const DetectionRecord*>& dets,
                                       const SceneAnnotation& scene,
                                       const EvalParams& p) {
  std::vector<bool> verdicts(dets.size(), false);
  std::vector<bool> taken(scene.objects.size(), false);
  for (std::size_t d = 0; d < dets.size(); ++d) {
    const ScoredGrasp top1 = ref_top1(*dets[d]);
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t o = 0; o < scene.objects.size(); ++o) {
      if (taken[o]) continue;
      const auto& obj = scene.objects[o];
      if (obj.category != dets[d]->category) continue;
      const double iou = box_iou(dets[d]->bbox, obj.bbox);
      if (!(iou > p.box_iou_thresh)) continue;
      if (!ref_grasp_ok(top1, obj.index, scene, p)) continue;
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(o);
      }
    }
    if (best >= 0) {
      taken[best] = true;
      verdicts[d] = true;
    }
  }
  return verdicts;
}

std::vector<const DetectionRecord*> ref_image_dets(
    const std::vector<DetectionRecord>& detections, const std::string& image_id,
    double min_score, const EvalParams& p) {
  std::vector<const DetectionRecord*> dets;
  for (const auto& det : detections) {
    if (det.image_id == image_id && det.score >= p.score_floor &&
        det.score >= min_score) {
      dets.push_back(&det);
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const DetectionRecord* a, const DetectionRecord* b) {
                     return a->score > b->score;
                   });
  return dets;
}

double ref_mr_at(const EvalCurve& curve, double target) {
  bool found = false;
  double best_fppi = 0.0;
  double best_miss = 1.0;
  for (const auto& pt : curve.points) {
    if (pt.fppi > target) continue;
    if (!found || pt.fppi > best_fppi ||
        (pt.fppi == best_fppi && pt.miss_rate < best_miss)) {
      found = true;
      best_fppi = pt.fppi;
      best_miss = pt.miss_rate;
    }
  }
  return found ? best_miss : 1.0;
}

}  // namespace

EvalReport oracle_metrics(const std::vector<DetectionRecord>& detections,
                          const std::vector<SceneAnnotation>& scenes,
                          const EvalParams& params) {
  std::size_t total_gt = 0;
  std::map<std::string, std::size_t> gt_per_category;
  for (const auto& scene : scenes) {
    total_gt += scene.objects.size();
    for (const auto& obj : scene.objects) ++gt_per_category[obj.category];
  }

  std::set<double> thresholds;
  for (const auto& det : detections) {
    if (det.score >= params.score_floor) thresholds.insert(det.score);
  }

  EvalReport report;
  auto curve_point_at = [&](double tau, bool empty_point) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (const auto& scene : scenes) {
      const auto dets = empty_point
                            ? std::vector<const DetectionRecord*>{}
                            : ref_image_dets(detections, scene.image_id, tau, params);
      const auto verdicts = ref_adjudicate_image(dets, scene, params);
      for (const bool v : verdicts) {
        if (v) {
          ++tp;
        } else {
          ++fp;
        }
      }
    }
    return CurvePoint{tau, static_cast<double>(fp) / static_cast<double>(scenes.size()),
                      1.0 - static_cast<double>(tp) / static_cast<double>(total_gt)};
  };
  for (const double tau : thresholds) {
    report.curve.points.push_back(curve_point_at(tau, false));
  }
  report.curve.points.push_back(
      curve_point_at(std::numeric_limits<double>::infinity(), true));

  report.mr0 = ref_mr_at(report.curve, 0.0);
  report.mr_minus1 = ref_mr_at(report.curve, 0.1);
  double log_sum = 0.0;
  for (int i = 0; i < 9; ++i) {
    const double ref = std::pow(10.0, -2.0 + 0.25 * i);
    log_sum += std::log(std::max(ref_mr_at(report.curve, ref), 1e-10));
  }
  report.lamr = std::exp(log_sum / 9.0);

  // AP per category: global ranking, per-image persistent matched sets.
  // Verdicts come from per-image greedy matching over that category only.
  double ap_sum = 0.0;
  for (const auto& [category, n_gt] : gt_per_category) {
    std::vector<std::pair<double, bool>> ranked;  // (score, tp) in rank order
    {
      std::vector<const DetectionRecord*> cat_dets;
      for (const auto& det : detections) {
        if (det.category == category && det.score >= params.score_floor) {
          cat_dets.push_back(&det);
        }
      }
      std::stable_sort(cat_dets.begin(), cat_dets.end(),
                       [](const DetectionRecord* a, const DetectionRecord* b) {
                         return a->score > b->score;
                       });
      std::map<std::string, std::vector<bool>> taken;
      std::map<std::string, const SceneAnnotation*> scene_by_id;
      for (const auto& scene : scenes) {
        taken[scene.image_id].assign(scene.objects.size(), false);
        scene_by_id[scene.image_id] = &scene;
      }
      for (const DetectionRecord* det : cat_dets) {
        const SceneAnnotation& scene = *scene_by_id.at(det->image_id);
        auto& used = taken[det->image_id];
        const ScoredGrasp top1 = ref_top1(*det);
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t o = 0; o < scene.objects.size(); ++o) {
          if (used[o] || scene.objects[o].category != category) continue;
          const double iou = box_iou(det->bbox, scene.objects[o].bbox);
          if (!(iou > params.box_iou_thresh)) continue;
          if (!ref_grasp_ok(top1, scene.objects[o].index, scene, params)) continue;
          if (iou > best_iou) {
            best_iou = iou;
            best = static_cast<int>(o);
          }
        }
        if (best >= 0) used[best] = true;
        ranked.emplace_back(det->score, best >= 0);
      }
    }

    std::vector<double> precision(ranked.size());
    std::vector<double> recall(ranked.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].second) ++tp;
      precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
      recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
    }
    double ap = 0.0;
    if (params.ap_mode == ApMode::eleven_point) {
      for (int t = 0; t <= 10; ++t) {
        const double r_ref = t / 10.0;
        double pmax = 0.0;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
          if (recall[i] >= r_ref) pmax = std::max(pmax, precision[i]);
        }
        ap += pmax;
      }
      ap /= 11.0;
    } else {
      double prev_recall = 0.0;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        // interpolated precision by direct suffix scan
        double p_env = 0.0;
        for (std::size_t j = i; j < ranked.size(); ++j) {
          p_env = std::max(p_env, precision[j]);
        }
        ap += (recall[i] - prev_recall) * p_env;
        prev_recall = recall[i];
      }
    }
    report.per_class_ap[category] = ap;
    ap_sum += ap;
  }
  report.map = ap_sum / static_cast<double>(gt_per_category.size());
  return report;
}

std::vector<ScoredGrasp> oracle_nms_grasps(const std::vector<ScoredGrasp>& candidates,
                                           double iou_threshold) {
  std::vector<std::pair<ScoredGrasp, std::size_t>> pool;
  for (std::size_t i = 0; i < candidates.size(); ++i) pool.emplace_back(candidates[i], i);
  std::vector<ScoredGrasp> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].first.score > pool[best].first.score ||
          (pool[i].first.score == pool[best].first.score &&
           pool[i].second < pool[best].second)) {
        best = i;
      }
    }
    const ScoredGrasp top = pool[best].first;
    kept.push_back(top);
    std::vector<std::pair<ScoredGrasp, std::size_t>> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (i == best) continue;
      if (rotated_iou(pool[i].first.rect, top.rect) > iou_threshold) continue;
      rest.push_back(pool[i]);
    }
    pool.swap(rest);
  }
  return kept;
}

std::vector<ScoredBox> oracle_nms_boxes(const std::vector<ScoredBox>& candidates,
                                        double iou_threshold) {
  std::vector<std::pair<ScoredBox, std::size_t>> pool;
  for (std::size_t i = 0; i < candidates.size(); ++i) pool.emplace_back(candidates[i], i);
  std::vector<ScoredBox> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].first.score > pool[best].first.score ||
          (pool[i].first.score == pool[best].first.score &&
           pool[i].second < pool[best].second)) {
        best = i;
      }
    }
    const ScoredBox top = pool[best].first;
    kept.push_back(top);
    std::vector<std::pair<ScoredBox, std::size_t>> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (i == best) continue;
      if (pool[i].first.category == top.category &&
          box_iou(pool[i].first.box, top.box) > iou_threshold) {
        continue;
      }
      rest.push_back(pool[i]);
    }
    pool.swap(rest);
  }
  return kept;
}

double monte_carlo_iou(const OrientedRect& a, const OrientedRect& b,
                       std::size_t samples, std::uint64_t seed) {
  const QuadVertices qa = rect_to_vertices(a);
  const QuadVertices qb = rect_to_vertices(b);
  double x_min = qa[0].x, x_max = qa[0].x, y_min = qa[0].y, y_max = qa[0].y;
  for (const auto& v : qa) {
    x_min = std::min(x_min, v.x);
    x_max = std::max(x_max, v.x);
    y_min = std::min(y_min, v.y);
    y_max = std::max(y_max, v.y);
  }
  for (const auto& v : qb) {
    x_min = std::min(x_min, v.x);
    x_max = std::max(x_max, v.x);
    y_min = std::min(y_min, v.y);
    y_max = std::max(y_max, v.y);
  }
  // cache both local frames
  struct Frame {
    double cx, cy, c, s, hw, hh;
  };
  auto frame = [](const OrientedRect& r) {
    const double rad = r.theta * (3.14159265358979323846 / 180.0);
    return Frame{r.x, r.y, std::cos(rad), std::sin(rad), 0.5 * r.w, 0.5 * r.h};
  };
  const Frame fa = frame(a);
  const Frame fb = frame(b);
  auto inside = [](const Frame& f, double px, double py) {
    const double dx = px - f.cx;
    const double dy = py - f.cy;
    const double u = dx * f.c + dy * f.s;
    const double v = -dx * f.s + dy * f.c;
    return std::abs(u) <= f.hw && std::abs(v) <= f.hh;
  };

  // splitmix64: tiny, portable, fast enough for >1e9 draws
  std::uint64_t state = seed;
  auto next_u01 = [&state]() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return (z >> 11) * 0x1.0p-53;
  };

  const double span_x = x_max - x_min;
  const double span_y = y_max - y_min;
  std::size_t in_union = 0;
  std::size_t in_inter = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double px = x_min + span_x * next_u01();
    const double py = y_min + span_y * next_u01();
    const bool ia = inside(fa, px, py);
    const bool ib = inside(fb, px, py);
    if (ia || ib) ++in_union;
    if (ia && ib) ++in_inter;
  }
  if (in_union == 0) return 0.0;
  return static_cast<double>(in_inter) / static_cast<double>(in_union);
}

}  // namespace roigd
