#include "roigd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace roigd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string scene_id(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05d", i);
  return buf;
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

bool boxes_intersect(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  return box_iou(a, b) > 0.0;
}

AxisAlignedBox jitter_box(const AxisAlignedBox& b, double sigma, double img_w,
                          double img_h, Rng& rng) {
  double x0 = b.x_min + rng.normal(0.0, sigma);
  double x1 = b.x_max + rng.normal(0.0, sigma);
  double y0 = b.y_min + rng.normal(0.0, sigma);
  double y1 = b.y_max + rng.normal(0.0, sigma);
  if (x0 > x1) std::swap(x0, x1);
  if (y0 > y1) std::swap(y0, y1);
  x0 = clamp(x0, 0.0, img_w - 1.0);
  y0 = clamp(y0, 0.0, img_h - 1.0);
  x1 = clamp(x1, x0 + 1.0, img_w);
  y1 = clamp(y1, y0 + 1.0, img_h);
  return {x0, y0, x1, y1};
}

OrientedRect jitter_grasp(const OrientedRect& g, double pos_sigma, double angle_sigma,
                          Rng& rng) {
  const double x = g.x + rng.normal(0.0, pos_sigma);
  const double y = g.y + rng.normal(0.0, pos_sigma);
  const double w = std::max(1.0, g.w + rng.normal(0.0, pos_sigma));
  const double h = std::max(1.0, g.h + rng.normal(0.0, pos_sigma));
  const double theta = g.theta + rng.normal(0.0, angle_sigma);
  return OrientedRect(x, y, w, h, theta);
}

// local TP criterion: some gt object passes every gate against det
bool planted_check(const DetectionRecord& det, const SceneAnnotation& scene,
                   const EvalParams& p) {
  const auto top1 = det.top1_grasp();
  if (!top1) return false;
  for (const auto& obj : scene.objects) {
    if (obj.category != det.category) continue;
    if (!(box_iou(det.bbox, obj.bbox) > p.box_iou_thresh)) continue;
    for (const auto& g : scene.grasps) {
      if (g.owner_index != obj.index) continue;
      if (p.ignore_hard && g.hard) continue;
      if (rotated_iou(top1->rect, g.rect) > p.jaccard_thresh &&
          angle_distance(top1->rect.theta, g.rect.theta) < p.angle_thresh_deg) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

double Rng::normal(double mean, double sigma) {
  // Box-Muller; u clamped away from 0 for the log
  const double u = std::max(uniform(), 0x1.0p-60);
  const double v = uniform();
  return mean + sigma * std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
}

const std::array<std::string, 31>& category_names() {
  static const std::array<std::string, 31> names = {
      "apple",         "banana",     "badminton",  "bottle",     "box",
      "can",           "card",       "charger",    "cup",        "glasses",
      "headset",       "knife",      "mobile_phone", "mouse",    "notebook",
      "paper",         "pen",        "pliers",     "remote_controller",
      "screwdriver",   "shaver",     "stapler",    "tape",       "toothbrush",
      "toothpaste",    "towel",      "umbrella",   "wallet",     "watch",
      "wrench",        "wrist_developer"};
  return names;
}

SynthConfig synth_config_from_json(const std::string& text, const std::string& filename) {
  SynthConfig cfg;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(filename + ": " + e.what());
  }
  try {
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("n_scenes")) cfg.n_scenes = doc["n_scenes"].get<int>();
    if (doc.contains("image_width")) cfg.image_width = doc["image_width"].get<double>();
    if (doc.contains("image_height")) cfg.image_height = doc["image_height"].get<double>();
    if (doc.contains("objects_per_scene")) {
      cfg.objects_per_scene = {doc["objects_per_scene"][0].get<int>(),
                               doc["objects_per_scene"][1].get<int>()};
    }
    if (doc.contains("grasps_per_object")) {
      cfg.grasps_per_object = {doc["grasps_per_object"][0].get<int>(),
                               doc["grasps_per_object"][1].get<int>()};
    }
    if (doc.contains("overlap_bias")) cfg.overlap_bias = doc["overlap_bias"].get<double>();
    if (doc.contains("hard_rate")) cfg.hard_rate = doc["hard_rate"].get<double>();
    if (doc.contains("det_prob")) cfg.det_prob = doc["det_prob"].get<double>();
    if (doc.contains("box_jitter")) cfg.box_jitter = doc["box_jitter"].get<double>();
    if (doc.contains("grasp_jitter")) cfg.grasp_jitter = doc["grasp_jitter"].get<double>();
    if (doc.contains("angle_jitter")) cfg.angle_jitter = doc["angle_jitter"].get<double>();
    if (doc.contains("fp_rate")) cfg.fp_rate = doc["fp_rate"].get<double>();
    if (doc.contains("score_model")) {
      const auto& sm = doc["score_model"];
      if (sm.contains("tp_lo")) cfg.score_model.tp_lo = sm["tp_lo"].get<double>();
      if (sm.contains("tp_hi")) cfg.score_model.tp_hi = sm["tp_hi"].get<double>();
      if (sm.contains("fp_lo")) cfg.score_model.fp_lo = sm["fp_lo"].get<double>();
      if (sm.contains("fp_hi")) cfg.score_model.fp_hi = sm["fp_hi"].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(filename + ": " + e.what());
  }
  if (cfg.n_scenes < 1 || cfg.objects_per_scene[0] > cfg.objects_per_scene[1] ||
      cfg.objects_per_scene[0] < 0 || cfg.grasps_per_object[0] > cfg.grasps_per_object[1] ||
      cfg.grasps_per_object[0] < 0 || cfg.overlap_bias < 0.0 || cfg.overlap_bias > 1.0 ||
      cfg.hard_rate < 0.0 || cfg.hard_rate > 1.0 || cfg.det_prob < 0.0 ||
      cfg.det_prob > 1.0 || cfg.fp_rate < 0.0 || cfg.fp_rate > 1.0 ||
      !(cfg.image_width >= 64.0) || !(cfg.image_height >= 64.0)) {
    throw ValidationError(filename + ": invalid synth configuration");
  }
  return cfg;
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  nlohmann::ordered_json doc;
  doc["seed"] = cfg.seed;
  doc["n_scenes"] = cfg.n_scenes;
  doc["image_width"] = cfg.image_width;
  doc["image_height"] = cfg.image_height;
  doc["objects_per_scene"] = {cfg.objects_per_scene[0], cfg.objects_per_scene[1]};
  doc["grasps_per_object"] = {cfg.grasps_per_object[0], cfg.grasps_per_object[1]};
  doc["overlap_bias"] = cfg.overlap_bias;
  doc["hard_rate"] = cfg.hard_rate;
  doc["det_prob"] = cfg.det_prob;
  doc["box_jitter"] = cfg.box_jitter;
  doc["grasp_jitter"] = cfg.grasp_jitter;
  doc["angle_jitter"] = cfg.angle_jitter;
  doc["fp_rate"] = cfg.fp_rate;
  doc["score_model"] = {{"tp_lo", cfg.score_model.tp_lo},
                        {"tp_hi", cfg.score_model.tp_hi},
                        {"fp_lo", cfg.score_model.fp_lo},
                        {"fp_hi", cfg.score_model.fp_hi}};
  return doc.dump(2) + "\n";
}

std::vector<SceneAnnotation> generate_scenes(const SynthConfig& cfg) {
  Rng rng(cfg.seed);
  const double img_w = cfg.image_width;
  const double img_h = cfg.image_height;
  std::vector<SceneAnnotation> scenes;
  scenes.reserve(cfg.n_scenes);
  for (int s = 0; s < cfg.n_scenes; ++s) {
    SceneAnnotation scene;
    scene.image_id = scene_id(s);
    scene.width = img_w;
    scene.height = img_h;
    const int n_obj = rng.uniform_int(cfg.objects_per_scene[0], cfg.objects_per_scene[1]);
    for (int o = 0; o < n_obj; ++o) {
      ObjectAnnotation obj;
      obj.index = o + 1;
      obj.category = category_names()[rng.uniform_int(0, 30)];
      double bw = rng.uniform(40.0, std::min(160.0, img_w * 0.5));
      double bh = rng.uniform(40.0, std::min(160.0, img_h * 0.5));
      const bool want_overlap = o > 0 && rng.bernoulli(cfg.overlap_bias);
      bool placed = false;
      for (int round = 0; round < 3 && !placed; ++round) {
        for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
          AxisAlignedBox cand;
          if (want_overlap) {
            const auto& prior = scene.objects[rng.uniform_int(0, o - 1)].bbox;
            const Vec2 c = prior.center();
            const double cx = clamp(c.x + rng.uniform(-0.4, 0.4) *
                                              (prior.width() + bw) * 0.5,
                                    bw * 0.5, img_w - bw * 0.5);
            const double cy = clamp(c.y + rng.uniform(-0.4, 0.4) *
                                              (prior.height() + bh) * 0.5,
                                    bh * 0.5, img_h - bh * 0.5);
            cand = {cx - bw * 0.5, cy - bh * 0.5, cx + bw * 0.5, cy + bh * 0.5};
            placed = boxes_intersect(cand, prior);
          } else {
            const double cx = rng.uniform(bw * 0.5, img_w - bw * 0.5);
            const double cy = rng.uniform(bh * 0.5, img_h - bh * 0.5);
            cand = {cx - bw * 0.5, cy - bh * 0.5, cx + bw * 0.5, cy + bh * 0.5};
            placed = std::none_of(scene.objects.begin(), scene.objects.end(),
                                  [&](const ObjectAnnotation& prev) {
                                    return boxes_intersect(cand, prev.bbox);
                                  });
          }
          if (placed) obj.bbox = cand;
        }
        if (!placed) {  // crowded scene: shrink and retry
          bw = std::max(12.0, bw * 0.5);
          bh = std::max(12.0, bh * 0.5);
        }
      }
      if (!placed) {
        // overlap placement cannot fail; for disjoint placement fall back
        // to accepting overlap rather than dropping the object
        const double cx = rng.uniform(bw * 0.5, img_w - bw * 0.5);
        const double cy = rng.uniform(bh * 0.5, img_h - bh * 0.5);
        obj.bbox = {cx - bw * 0.5, cy - bh * 0.5, cx + bw * 0.5, cy + bh * 0.5};
      }
      scene.objects.push_back(obj);

      const int n_grasp = rng.uniform_int(cfg.grasps_per_object[0],
                                          cfg.grasps_per_object[1]);
      for (int g = 0; g < n_grasp; ++g) {
        const double margin = 6.0;
        const double gx = rng.uniform(obj.bbox.x_min + margin, obj.bbox.x_max - margin);
        const double gy = rng.uniform(obj.bbox.y_min + margin, obj.bbox.y_max - margin);
        const double gw = rng.uniform(12.0, 48.0);
        const double gh = rng.uniform(8.0, 24.0);
        const double theta = rng.uniform(-90.0, 90.0);
        scene.grasps.push_back({OrientedRect(gx, gy, gw, gh, theta),
                                rng.bernoulli(cfg.hard_rate), obj.index});
      }
    }
    validate_scene(scene);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

std::vector<PlantedDetection> generate_detections(
    const std::vector<SceneAnnotation>& scenes, const SynthConfig& cfg,
    const EvalParams& params) {
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);  // separate stream from scene generation
  std::vector<PlantedDetection> out;
  for (const auto& scene : scenes) {
    for (const auto& obj : scene.objects) {
      if (!rng.bernoulli(cfg.det_prob)) continue;
      PlantedDetection pd;
      pd.source_object = obj.index;
      pd.det.image_id = scene.image_id;
      pd.det.category = obj.category;
      pd.det.bbox = jitter_box(obj.bbox, cfg.box_jitter, scene.width, scene.height, rng);

      std::vector<const GraspAnnotation*> owned;
      for (const auto& g : scene.grasps) {
        if (g.owner_index == obj.index) owned.push_back(&g);
      }
      const int n_cand = rng.uniform_int(1, 3);
      for (int c = 0; c < n_cand; ++c) {
        OrientedRect base = owned.empty()
                                ? OrientedRect(obj.bbox.center().x, obj.bbox.center().y,
                                               24.0, 12.0, rng.uniform(-90.0, 90.0))
                                : owned[rng.uniform_int(0, static_cast<int>(owned.size()) - 1)]
                                      ->rect;
        pd.det.grasps.push_back(
            {jitter_grasp(base, cfg.grasp_jitter, cfg.angle_jitter, rng),
             rng.uniform(0.3, 1.0)});
      }
      pd.planted_tp = planted_check(pd.det, scene, params);
      const auto& sm = cfg.score_model;
      pd.det.score = pd.planted_tp ? rng.uniform(sm.tp_lo, sm.tp_hi)
                                   : rng.uniform(sm.fp_lo, sm.fp_hi);
      out.push_back(std::move(pd));
    }
    if (rng.bernoulli(cfg.fp_rate)) {
      PlantedDetection pd;
      pd.det.image_id = scene.image_id;
      pd.det.category = category_names()[rng.uniform_int(0, 30)];
      const double bw = rng.uniform(40.0, 120.0);
      const double bh = rng.uniform(40.0, 120.0);
      const double cx = rng.uniform(bw * 0.5, scene.width - bw * 0.5);
      const double cy = rng.uniform(bh * 0.5, scene.height - bh * 0.5);
      pd.det.bbox = {cx - bw * 0.5, cy - bh * 0.5, cx + bw * 0.5, cy + bh * 0.5};
      pd.det.grasps.push_back(
          {OrientedRect(cx, cy, rng.uniform(12.0, 48.0), rng.uniform(8.0, 24.0),
                        rng.uniform(-90.0, 90.0)),
           rng.uniform(0.3, 1.0)});
      pd.planted_tp = planted_check(pd.det, scene, params);
      const auto& sm = cfg.score_model;
      pd.det.score = pd.planted_tp ? rng.uniform(sm.tp_lo, sm.tp_hi)
                                   : rng.uniform(sm.fp_lo, sm.fp_hi);
      out.push_back(std::move(pd));
    }
  }
  return out;
}

std::vector<DetectionRecord> strip_labels(const std::vector<PlantedDetection>& planted) {
  std::vector<DetectionRecord> dets;
  dets.reserve(planted.size());
  for (const auto& pd : planted) dets.push_back(pd.det);
  return dets;
}

std::string planted_to_json(const std::vector<PlantedDetection>& planted) {
  std::string out;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    nlohmann::ordered_json doc;
    doc["image_id"] = planted[i].det.image_id;
    doc["detection"] = i;
    doc["planted_tp"] = planted[i].planted_tp;
    if (planted[i].source_object) {
      doc["source_object"] = *planted[i].source_object;
    } else {
      doc["source_object"] = nullptr;
    }
    out += doc.dump();
    out += '\n';
  }
  return out;
}

}  // namespace roigd
