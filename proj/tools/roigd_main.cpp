#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roigd/assignment.hpp"
#include "roigd/dataset.hpp"
#include "roigd/depth.hpp"
#include "roigd/detection.hpp"
#include "roigd/io_util.hpp"
#include "roigd/metrics.hpp"
#include "roigd/nms.hpp"
#include "roigd/synth.hpp"

namespace fs = std::filesystem;
using namespace roigd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;   // parse/validation failures
constexpr int kExitDomain = 3;  // domain errors (NoValidDepth, ...)

unsigned default_jobs() {
  if (const char* env = std::getenv("GRASP_EVAL_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

struct EvalFlags {
  std::string gt_dir;
  std::string det_file;
  std::string out_dir;
  EvalParams params;
  std::string ap_mode = "all-point";
  unsigned jobs = default_jobs();
};

int run_eval(const EvalFlags& flags) {
  EvalParams params = flags.params;
  params.jobs = flags.jobs;
  params.ap_mode = flags.ap_mode == "eleven" ? ApMode::eleven_point : ApMode::all_point;

  const auto scenes = load_dataset(flags.gt_dir);
  const auto detections =
      parse_detection_file(slurp_file(flags.det_file), flags.det_file);
  const EvalReport report = evaluate(detections, scenes, params);

  fs::create_directories(flags.out_dir);
  write_file(fs::path(flags.out_dir) / "report", report_to_json(report));
  write_file(fs::path(flags.out_dir) / "curve.csv", curve_to_csv(report.curve));
  std::cout << "mr0=" << report.mr0 << " mr_minus1=" << report.mr_minus1
            << " lamr=" << report.lamr << " map=" << report.map << "\n";
  return kExitOk;
}

int run_convert(const std::string& in, const std::string& out,
                const std::string& direction, double rect_tol) {
  const std::string text = slurp_file(in);
  if (direction == "to-xywht") {
    write_file(out, write_xywht_doc(parse_grasp_doc(text, rect_tol, in)));
  } else if (direction == "to-vertices") {
    write_file(out, write_grasp_doc(parse_xywht_doc(text, in)));
  } else {
    std::cerr << "unknown direction '" << direction
              << "' (expected to-xywht|to-vertices)\n";
    return kExitInput;
  }
  return kExitOk;
}

int run_synth(const std::string& config_file, const std::string& out_dir) {
  const SynthConfig cfg = synth_config_from_json(slurp_file(config_file), config_file);
  const auto scenes = generate_scenes(cfg);
  const auto planted = generate_detections(scenes, cfg);
  write_dataset(out_dir, scenes);
  write_file(fs::path(out_dir) / "detections.jsonl",
             write_detection_file(strip_labels(planted)));
  write_file(fs::path(out_dir) / "planted.jsonl", planted_to_json(planted));
  std::cout << "wrote " << scenes.size() << " scenes, " << planted.size()
            << " detections to " << out_dir << "\n";
  return kExitOk;
}

int run_nms(const std::string& in, const std::string& out, double grasp_thresh,
            double box_thresh, bool global_grasp) {
  auto records = parse_detection_file(slurp_file(in), in);

  // group record indices per image, preserving input order
  std::vector<std::string> image_order;
  std::map<std::string, std::vector<std::size_t>> per_image;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = per_image.try_emplace(records[i].image_id);
    if (inserted) image_order.push_back(records[i].image_id);
    it->second.push_back(i);
  }

  std::vector<DetectionRecord> result;
  for (const auto& image_id : image_order) {
    const auto& indices = per_image[image_id];

    // per-class box NMS across the image's detections
    std::vector<ScoredBox> boxes;
    for (const std::size_t i : indices) {
      boxes.push_back({records[i].bbox, records[i].category, records[i].score});
    }
    const auto kept_boxes = nms_boxes_keep(boxes, box_thresh);

    std::vector<DetectionRecord> survivors;
    for (const std::size_t k : kept_boxes) survivors.push_back(records[indices[k]]);

    if (global_grasp) {
      // pool every grasp of the image, suppress jointly, keep survivors per record
      std::vector<ScoredGrasp> pool;
      std::vector<std::pair<std::size_t, std::size_t>> origin;  // (survivor, grasp)
      for (std::size_t s = 0; s < survivors.size(); ++s) {
        for (std::size_t g = 0; g < survivors[s].grasps.size(); ++g) {
          pool.push_back(survivors[s].grasps[g]);
          origin.emplace_back(s, g);
        }
      }
      const auto kept = nms_grasps_keep(pool, grasp_thresh);
      std::vector<std::vector<ScoredGrasp>> new_grasps(survivors.size());
      for (const std::size_t k : kept) {
        new_grasps[origin[k].first].push_back(pool[k]);
      }
      for (std::size_t s = 0; s < survivors.size(); ++s) {
        survivors[s].grasps = std::move(new_grasps[s]);
      }
    } else {
      for (auto& rec : survivors) {
        rec.grasps = nms_grasps(rec.grasps, grasp_thresh);
      }
    }
    for (auto& rec : survivors) result.push_back(std::move(rec));
  }

  write_file(out, write_detection_file(result));
  return kExitOk;
}

int run_grasp3d(const std::string& det_file, const std::string& depth_dir,
                const std::string& intrinsics_file, const std::string& out,
                int radius, double min_score) {
  const Intrinsics intr = load_intrinsics(intrinsics_file);
  const auto records = parse_detection_file(slurp_file(det_file), det_file);

  std::map<std::string, DepthMap> depth_cache;
  auto depth_for = [&](const std::string& image_id) -> const DepthMap& {
    auto it = depth_cache.find(image_id);
    if (it != depth_cache.end()) return it->second;
    fs::path path = fs::path(depth_dir) / (image_id + ".pgm");
    if (!fs::exists(path)) path = fs::path(depth_dir) / (image_id + ".txt");
    if (!fs::exists(path)) {
      throw ParseError("no depth file for image '" + image_id + "' in " + depth_dir);
    }
    return depth_cache.emplace(image_id, load_depth(path, intr)).first->second;
  };

  std::string out_text;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto grasp = select_execution_grasp(rec, min_score);
    if (!grasp) {
      ++skipped;  // no candidate above the score gate
      continue;
    }
    GraspPose pose;
    try {
      pose = grasp_pose(grasp->rect, depth_for(rec.image_id), radius);
    } catch (const NoValidDepth& e) {
      throw NoValidDepth("image '" + rec.image_id + "' detection " +
                         std::to_string(i) + ": " + e.what());
    } catch (const DegenerateNeighborhood& e) {
      throw DegenerateNeighborhood("image '" + rec.image_id + "' detection " +
                                   std::to_string(i) + ": " + e.what());
    }
    nlohmann::ordered_json doc;
    doc["image_id"] = rec.image_id;
    doc["category"] = rec.category;
    doc["score"] = rec.score;
    doc["pixel"] = {pose.pixel[0], pose.pixel[1]};
    doc["point"] = {pose.point[0], pose.point[1], pose.point[2]};
    doc["normal"] = {pose.normal[0], pose.normal[1], pose.normal[2]};
    out_text += doc.dump();
    out_text += '\n';
  }
  write_file(out, out_text);
  std::cout << "wrote " << (records.size() - skipped) << " poses (" << skipped
            << " detections below the score gate)\n";
  return kExitOk;
}

int run_augment(const std::string& gt_dir, const std::string& transform,
                const std::string& out_dir) {
  const Transform t = transform_from_name(transform);
  auto scenes = load_dataset(gt_dir);
  for (auto& scene : scenes) scene = augment(scene, t);
  write_dataset(out_dir, scenes);
  return kExitOk;
}

int run_anchors(const std::vector<double>& roi_vals, int grid_w, int grid_h, int k,
                double size, const std::string& out) {
  const AxisAlignedBox roi{roi_vals[0], roi_vals[1], roi_vals[2], roi_vals[3]};
  const AnchorGrid grid = build_anchor_grid(roi, {grid_w, grid_h, k, size});
  std::string csv = "cell_x,cell_y,orientation,flat_index,x,y,w,h,theta\n";
  for (int j = 0; j < grid_h; ++j) {
    for (int i = 0; i < grid_w; ++i) {
      for (int m = 0; m < k; ++m) {
        const auto& a = grid.anchors[grid.flat_index(i, j, m)];
        csv += std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(m) +
               "," + std::to_string(grid.flat_index(i, j, m)) + "," + fmt_g(a.x) + "," +
               fmt_g(a.y) + "," + fmt_g(a.w) + "," + fmt_g(a.h) + "," + fmt_g(a.theta) +
               "\n";
      }
    }
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_file(out, csv);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RoI grasp detection toolkit: annotation I/O, anchors, NMS,\n"
               "FPPI/miss-rate/mAP evaluation, and depth-based grasp poses"};
  app.require_subcommand(1);

  // eval
  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "evaluate a detection file against a dataset");
  eval->add_option("--gt", ef.gt_dir, "dataset root directory")->required();
  eval->add_option("--det", ef.det_file, "detection JSONL file")->required();
  eval->add_option("--out", ef.out_dir, "output directory for report and curve.csv")
      ->required();
  eval->add_option("--jaccard-thresh", ef.params.jaccard_thresh,
                   "grasp Jaccard gate (default 0.25)");
  eval->add_option("--angle-thresh", ef.params.angle_thresh_deg,
                   "grasp angle gate in degrees (default 30)");
  eval->add_option("--box-iou-thresh", ef.params.box_iou_thresh,
                   "object box IoU gate (default 0.5)");
  eval->add_flag("--ignore-hard", ef.params.ignore_hard,
                 "exclude hard grasps as match targets");
  eval->add_option("--score-floor", ef.params.score_floor,
                   "drop detections below this score before evaluation");
  eval->add_option("--ap-mode", ef.ap_mode, "all-point (default) or eleven")
      ->check(CLI::IsMember({"all-point", "eleven"}));
  eval->add_option("--jobs", ef.jobs, "worker threads (default $GRASP_EVAL_JOBS or 1)");

  // convert
  std::string conv_in, conv_out, conv_dir;
  double conv_tol = 0.02;
  auto* convert = app.add_subcommand(
      "convert", "convert grasp files between vertex and center forms");
  convert->add_option("--in", conv_in)->required();
  convert->add_option("--out", conv_out)->required();
  convert->add_option("--direction", conv_dir, "to-xywht | to-vertices")->required();
  convert->add_option("--rect-tol", conv_tol, "rectangularity tolerance (default 0.02)");

  // synth
  std::string synth_cfg, synth_out;
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic annotated dataset with emulated detections");
  synth->add_option("--config", synth_cfg, "JSON generator configuration")->required();
  synth->add_option("--out", synth_out, "output dataset directory")->required();

  // nms
  std::string nms_in, nms_out;
  double nms_grasp_thresh = 0.3;
  double nms_box_thresh = 0.3;
  bool nms_global = false;
  auto* nms = app.add_subcommand("nms", "suppress detections and grasp candidates");
  nms->add_option("--in", nms_in)->required();
  nms->add_option("--out", nms_out)->required();
  nms->add_option("--nms-grasp", nms_grasp_thresh, "grasp IoU threshold (default 0.3)");
  nms->add_option("--nms-box", nms_box_thresh, "box IoU threshold (default 0.3)");
  nms->add_flag("--global-grasp-nms", nms_global,
                "pool grasps image-wide instead of per detection");

  // grasp3d
  std::string g3_det, g3_depth, g3_intr, g3_out;
  int g3_radius = 5;
  double g3_min_score = 0.5;
  auto* grasp3d = app.add_subcommand(
      "grasp3d", "derive 3-D grasp points and approach vectors from depth");
  grasp3d->add_option("--det", g3_det)->required();
  grasp3d->add_option("--depth-dir", g3_depth, "directory of <image_id>.pgm|.txt")
      ->required();
  grasp3d->add_option("--intrinsics", g3_intr, "JSON {fx, fy, cx, cy}")->required();
  grasp3d->add_option("--out", g3_out)->required();
  grasp3d->add_option("--radius", g3_radius, "normal-estimation window radius");
  grasp3d->add_option("--min-score", g3_min_score,
                      "execution grasp score gate (default 0.5)");

  // augment
  std::string aug_gt, aug_transform, aug_out;
  auto* aug = app.add_subcommand("augment", "apply a rigid transform to a dataset");
  aug->add_option("--gt", aug_gt)->required();
  aug->add_option("--transform", aug_transform, "hflip | rot90 | rot180 | rot270")
      ->required();
  aug->add_option("--out", aug_out)->required();

  // anchors
  std::vector<double> anchor_roi;
  int anchor_gw = 7, anchor_gh = 7, anchor_k = 4;
  double anchor_size = 12.0;
  std::string anchor_out;
  auto* anchors = app.add_subcommand("anchors", "dump an oriented anchor grid as CSV");
  anchors->add_option("--roi", anchor_roi, "x_min y_min x_max y_max")
      ->expected(4)
      ->required();
  anchors->add_option("--grid-w", anchor_gw);
  anchors->add_option("--grid-h", anchor_gh);
  anchors->add_option("--k", anchor_k);
  anchors->add_option("--size", anchor_size, "anchor side length in pixels");
  anchors->add_option("--out", anchor_out, "output file (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*eval) return run_eval(ef);
    if (*convert) return run_convert(conv_in, conv_out, conv_dir, conv_tol);
    if (*synth) return run_synth(synth_cfg, synth_out);
    if (*nms) return run_nms(nms_in, nms_out, nms_grasp_thresh, nms_box_thresh, nms_global);
    if (*grasp3d) {
      return run_grasp3d(g3_det, g3_depth, g3_intr, g3_out, g3_radius, g3_min_score);
    }
    if (*aug) return run_augment(aug_gt, aug_transform, aug_out);
    if (*anchors) {
      return run_anchors(anchor_roi, anchor_gw, anchor_gh, anchor_k, anchor_size,
                         anchor_out);
    }
  } catch (const NoValidDepth& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const DegenerateNeighborhood& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const GraspOutsideRoi& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
