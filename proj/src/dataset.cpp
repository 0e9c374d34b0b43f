#include "roigd/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "roigd/io_util.hpp"

namespace roigd {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t") == std::string::npos;
}

struct LineTokens {
  const std::string& file;
  int line_no;
  std::istringstream iss;

  LineTokens(const std::string& text, const std::string& file_, int line_no_)
      : file(file_), line_no(line_no_), iss(text) {}

  double next_double(const char* what) {
    double v = 0.0;
    if (!(iss >> v) || !std::isfinite(v)) {
      throw ParseError(file, line_no, std::string("expected finite number for ") + what);
    }
    return v;
  }

  int next_int(const char* what) {
    long v = 0;
    if (!(iss >> v)) {
      throw ParseError(file, line_no, std::string("expected integer for ") + what);
    }
    return static_cast<int>(v);
  }

  void expect_end() {
    std::string extra;
    if (iss >> extra) {
      throw ParseError(file, line_no, "unexpected trailing token '" + extra + "'");
    }
  }
};

AxisAlignedBox transform_box(const AxisAlignedBox& b, Transform t, double w, double h) {
  switch (t) {
    case Transform::hflip:
      return {w - b.x_max, b.y_min, w - b.x_min, b.y_max};
    case Transform::rot90:  // clockwise: (x, y) -> (h - y, x)
      return {h - b.y_max, b.x_min, h - b.y_min, b.x_max};
    case Transform::rot180:
      return {w - b.x_max, h - b.y_max, w - b.x_min, h - b.y_min};
    case Transform::rot270:  // counterclockwise: (x, y) -> (y, w - x)
      return {b.y_min, w - b.x_max, b.y_max, w - b.x_min};
  }
  throw Error("unreachable transform");
}

OrientedRect transform_rect(const OrientedRect& r, Transform t, double w, double h) {
  switch (t) {
    case Transform::hflip:
      return OrientedRect(w - r.x, r.y, r.w, r.h, -r.theta);
    case Transform::rot90:
      return OrientedRect(h - r.y, r.x, r.w, r.h, r.theta + 90.0);
    case Transform::rot180:
      return OrientedRect(w - r.x, h - r.y, r.w, r.h, r.theta);
    case Transform::rot270:
      return OrientedRect(r.y, w - r.x, r.w, r.h, r.theta - 90.0);
  }
  throw Error("unreachable transform");
}

}  // namespace

Transform transform_from_name(const std::string& name) {
  if (name == "hflip") return Transform::hflip;
  if (name == "rot90") return Transform::rot90;
  if (name == "rot180") return Transform::rot180;
  if (name == "rot270") return Transform::rot270;
  throw ParseError("unknown transform '" + name + "' (expected hflip|rot90|rot180|rot270)");
}

std::string transform_name(Transform t) {
  switch (t) {
    case Transform::hflip: return "hflip";
    case Transform::rot90: return "rot90";
    case Transform::rot180: return "rot180";
    case Transform::rot270: return "rot270";
  }
  return "?";
}

void validate_scene(const SceneAnnotation& s) {
  if (!(s.width > 0.0) || !(s.height > 0.0)) {
    throw ValidationError("scene '" + s.image_id + "': non-positive image dimensions");
  }
  std::set<int> indices;
  for (const auto& obj : s.objects) {
    if (obj.index < 1) {
      throw ValidationError("scene '" + s.image_id + "': object index must be >= 1");
    }
    if (!indices.insert(obj.index).second) {
      throw ValidationError("scene '" + s.image_id + "': duplicate object index " +
                            std::to_string(obj.index));
    }
    if (!obj.bbox.valid() || obj.bbox.x_min < 0.0 || obj.bbox.y_min < 0.0 ||
        obj.bbox.x_max > s.width || obj.bbox.y_max > s.height) {
      throw ValidationError("scene '" + s.image_id + "': object " +
                            std::to_string(obj.index) + " bbox out of bounds");
    }
    if (obj.category.empty()) {
      throw ValidationError("scene '" + s.image_id + "': object " +
                            std::to_string(obj.index) + " has empty category");
    }
  }
  for (std::size_t g = 0; g < s.grasps.size(); ++g) {
    const auto& grasp = s.grasps[g];
    if (indices.count(grasp.owner_index) == 0) {
      throw ValidationError("scene '" + s.image_id + "': grasp " + std::to_string(g) +
                            " references missing object index " +
                            std::to_string(grasp.owner_index));
    }
    if (grasp.rect.x < 0.0 || grasp.rect.x > s.width || grasp.rect.y < 0.0 ||
        grasp.rect.y > s.height) {
      throw ValidationError("scene '" + s.image_id + "': grasp " + std::to_string(g) +
                            " center outside image bounds");
    }
  }
}

std::vector<GraspAnnotation> parse_grasp_doc(const std::string& text, double rect_tol,
                                             const std::string& filename) {
  std::vector<GraspAnnotation> grasps;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const int line_no = static_cast<int>(i) + 1;
    LineTokens tok(lines[i], filename, line_no);
    QuadVertices q;
    for (int v = 0; v < 4; ++v) {
      q[v].x = tok.next_double("vertex x");
      q[v].y = tok.next_double("vertex y");
    }
    const int flag = tok.next_int("easy/hard flag");
    const int index = tok.next_int("object index");
    tok.expect_end();
    if (flag != 0 && flag != 1) {
      throw ParseError(filename, line_no, "flag must be 0 or 1");
    }
    if (index < 1) {
      throw ParseError(filename, line_no, "object index must be >= 1");
    }
    try {
      grasps.push_back({vertices_to_rect(q, rect_tol), flag == 1, index});
    } catch (const NotARectangle& e) {
      throw ValidationError(filename + ":" + std::to_string(line_no) +
                            ": grasp quad is not a rectangle: " + e.what());
    }
  }
  return grasps;
}

std::string write_grasp_doc(const std::vector<GraspAnnotation>& grasps) {
  std::string out;
  for (const auto& g : grasps) {
    const QuadVertices q = rect_to_vertices(g.rect);
    for (int v = 0; v < 4; ++v) {
      out += fmt_fixed(q[v].x, 6);
      out += ' ';
      out += fmt_fixed(q[v].y, 6);
      out += ' ';
    }
    out += g.hard ? '1' : '0';
    out += ' ';
    out += std::to_string(g.owner_index);
    out += '\n';
  }
  return out;
}

std::vector<GraspAnnotation> parse_xywht_doc(const std::string& text,
                                             const std::string& filename) {
  std::vector<GraspAnnotation> grasps;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const int line_no = static_cast<int>(i) + 1;
    LineTokens tok(lines[i], filename, line_no);
    const double x = tok.next_double("x");
    const double y = tok.next_double("y");
    const double w = tok.next_double("w");
    const double h = tok.next_double("h");
    const double theta = tok.next_double("theta");
    const int flag = tok.next_int("easy/hard flag");
    const int index = tok.next_int("object index");
    tok.expect_end();
    if (flag != 0 && flag != 1) {
      throw ParseError(filename, line_no, "flag must be 0 or 1");
    }
    if (index < 1) {
      throw ParseError(filename, line_no, "object index must be >= 1");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
      throw ValidationError(filename + ":" + std::to_string(line_no) +
                            ": grasp extents must be positive");
    }
    grasps.push_back({OrientedRect(x, y, w, h, theta), flag == 1, index});
  }
  return grasps;
}

std::string write_xywht_doc(const std::vector<GraspAnnotation>& grasps) {
  std::string out;
  for (const auto& g : grasps) {
    out += fmt_fixed(g.rect.x, 6);
    out += ' ';
    out += fmt_fixed(g.rect.y, 6);
    out += ' ';
    out += fmt_fixed(g.rect.w, 6);
    out += ' ';
    out += fmt_fixed(g.rect.h, 6);
    out += ' ';
    out += fmt_fixed(g.rect.theta, 6);
    out += ' ';
    out += g.hard ? '1' : '0';
    out += ' ';
    out += std::to_string(g.owner_index);
    out += '\n';
  }
  return out;
}

SceneAnnotation parse_scene(const std::string& object_doc, const std::string& grasp_doc,
                            double rect_tol, const std::string& object_filename,
                            const std::string& grasp_filename) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(object_doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(object_filename + ": " + e.what());
  }
  SceneAnnotation scene;
  try {
    scene.image_id = doc.at("image_id").get<std::string>();
    scene.width = doc.at("width").get<double>();
    scene.height = doc.at("height").get<double>();
    for (const auto& o : doc.at("objects")) {
      ObjectAnnotation obj;
      obj.index = o.at("index").get<int>();
      obj.category = o.at("category").get<std::string>();
      const auto& bb = o.at("bbox");
      if (!bb.is_array() || bb.size() != 4) {
        throw ParseError(object_filename + ": bbox must be [x_min, y_min, x_max, y_max]");
      }
      obj.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                  bb[3].get<double>()};
      scene.objects.push_back(std::move(obj));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(object_filename + ": " + e.what());
  }
  scene.grasps = parse_grasp_doc(grasp_doc, rect_tol, grasp_filename);
  validate_scene(scene);
  return scene;
}

std::pair<std::string, std::string> write_scene(const SceneAnnotation& s) {
  ordered_json doc;
  doc["image_id"] = s.image_id;
  doc["width"] = s.width;
  doc["height"] = s.height;
  doc["objects"] = ordered_json::array();
  for (const auto& obj : s.objects) {
    ordered_json o;
    o["index"] = obj.index;
    o["category"] = obj.category;
    o["bbox"] = {obj.bbox.x_min, obj.bbox.y_min, obj.bbox.x_max, obj.bbox.y_max};
    doc["objects"].push_back(std::move(o));
  }
  return {doc.dump(2) + "\n", write_grasp_doc(s.grasps)};
}

SceneAnnotation augment(const SceneAnnotation& s, Transform t) {
  SceneAnnotation out;
  out.image_id = s.image_id;
  const bool swap_dims = t == Transform::rot90 || t == Transform::rot270;
  out.width = swap_dims ? s.height : s.width;
  out.height = swap_dims ? s.width : s.height;
  out.objects.reserve(s.objects.size());
  for (const auto& obj : s.objects) {
    out.objects.push_back({obj.index, obj.category,
                           transform_box(obj.bbox, t, s.width, s.height)});
  }
  out.grasps.reserve(s.grasps.size());
  for (const auto& g : s.grasps) {
    out.grasps.push_back({transform_rect(g.rect, t, s.width, s.height), g.hard,
                          g.owner_index});
  }
  return out;
}

SceneAnnotation scale_scene(const SceneAnnotation& s, double short_side) {
  if (!(short_side > 0.0)) throw ValidationError("scale_scene: short_side must be > 0");
  const double f = short_side / std::min(s.width, s.height);
  SceneAnnotation out;
  out.image_id = s.image_id;
  out.width = s.width * f;
  out.height = s.height * f;
  out.objects.reserve(s.objects.size());
  for (const auto& obj : s.objects) {
    out.objects.push_back({obj.index, obj.category,
                           {obj.bbox.x_min * f, obj.bbox.y_min * f, obj.bbox.x_max * f,
                            obj.bbox.y_max * f}});
  }
  out.grasps.reserve(s.grasps.size());
  for (const auto& g : s.grasps) {
    out.grasps.push_back({OrientedRect(g.rect.x * f, g.rect.y * f, g.rect.w * f,
                                       g.rect.h * f, g.rect.theta),
                          g.hard, g.owner_index});
  }
  return out;
}

std::vector<SceneAnnotation> load_dataset(const std::filesystem::path& root) {
  const auto index_path = root / "index";
  const auto lines = split_lines(slurp_file(index_path));
  std::vector<SceneAnnotation> scenes;
  for (const auto& line : lines) {
    if (blank(line)) continue;
    const auto obj_path = root / "annotations" / (line + ".objects");
    const auto grasp_path = root / "annotations" / (line + ".grasp");
    SceneAnnotation scene = parse_scene(slurp_file(obj_path), slurp_file(grasp_path),
                                        0.02, obj_path.string(), grasp_path.string());
    if (scene.image_id != line) {
      throw ValidationError(obj_path.string() + ": image_id '" + scene.image_id +
                            "' does not match index entry '" + line + "'");
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

void write_dataset(const std::filesystem::path& root,
                   const std::vector<SceneAnnotation>& scenes) {
  std::filesystem::create_directories(root / "annotations");
  std::string index;
  for (const auto& scene : scenes) {
    const auto [obj_doc, grasp_doc] = write_scene(scene);
    write_file(root / "annotations" / (scene.image_id + ".objects"), obj_doc);
    write_file(root / "annotations" / (scene.image_id + ".grasp"), grasp_doc);
    index += scene.image_id;
    index += '\n';
  }
  write_file(root / "index", index);
}

}  // namespace roigd
