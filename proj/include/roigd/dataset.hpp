#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "roigd/geometry.hpp"

namespace roigd {

struct GraspAnnotation {
  OrientedRect rect;
  bool hard = false;
  int owner_index = 1;  // index of the object instance this grasp belongs to
};

struct ObjectAnnotation {
  int index = 1;  // unique per scene, >= 1
  std::string category;
  AxisAlignedBox bbox;
};

struct SceneAnnotation {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<ObjectAnnotation> objects;
  std::vector<GraspAnnotation> grasps;
};

enum class Transform { hflip, rot90, rot180, rot270 };

Transform transform_from_name(const std::string& name);
std::string transform_name(Transform t);

// Throws ValidationError on dangling owner indices, duplicate object
// indices, out-of-bounds boxes or grasp centers.
void validate_scene(const SceneAnnotation& s);

// Grasp document grammar: one grasp per line, ten whitespace-separated
// tokens "x1 y1 x2 y2 x3 y3 x4 y4 flag index" (flag 0 = easy, 1 = hard).
std::vector<GraspAnnotation> parse_grasp_doc(const std::string& text,
                                             double rect_tol = 0.02,
                                             const std::string& filename = "<grasp>");
std::string write_grasp_doc(const std::vector<GraspAnnotation>& grasps);

// Center form, one grasp per line: "x y w h theta flag index".
std::vector<GraspAnnotation> parse_xywht_doc(const std::string& text,
                                             const std::string& filename = "<xywht>");
std::string write_xywht_doc(const std::vector<GraspAnnotation>& grasps);

// Object document: one JSON record
//   {"image_id": ..., "width": ..., "height": ...,
//    "objects": [{"index": ..., "category": ..., "bbox": [x0, y0, x1, y1]}]}
SceneAnnotation parse_scene(const std::string& object_doc, const std::string& grasp_doc,
                            double rect_tol = 0.02,
                            const std::string& object_filename = "<objects>",
                            const std::string& grasp_filename = "<grasp>");
std::pair<std::string, std::string> write_scene(const SceneAnnotation& s);

SceneAnnotation augment(const SceneAnnotation& s, Transform t);

// Uniform rescale so min(width, height) == short_side; angles unchanged.
SceneAnnotation scale_scene(const SceneAnnotation& s, double short_side);

// Dataset root layout: <root>/index with one image_id per line and
// <root>/annotations/<id>.objects + <id>.grasp pairs.
std::vector<SceneAnnotation> load_dataset(const std::filesystem::path& root);
void write_dataset(const std::filesystem::path& root,
                   const std::vector<SceneAnnotation>& scenes);

}  // namespace roigd
