#include "roigd/detection.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

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

}  // namespace

std::optional<ScoredGrasp> DetectionRecord::top1_grasp() const {
  if (grasps.empty()) return std::nullopt;
  const ScoredGrasp* best = &grasps.front();
  for (const auto& g : grasps) {
    if (g.score > best->score) best = &g;
  }
  return *best;
}

std::vector<DetectionRecord> parse_detection_file(const std::string& text,
                                                  const std::string& filename) {
  std::vector<DetectionRecord> records;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    const int line_no = static_cast<int>(i) + 1;
    ordered_json doc;
    try {
      doc = ordered_json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(filename, line_no, e.what());
    }
    try {
      const std::string image_id = doc.at("image_id").get<std::string>();
      for (const auto& d : doc.at("detections")) {
        DetectionRecord rec;
        rec.image_id = image_id;
        rec.category = d.at("category").get<std::string>();
        rec.score = d.at("score").get<double>();
        if (!std::isfinite(rec.score) || rec.score < 0.0 || rec.score > 1.0) {
          throw ParseError(filename, line_no, "detection score must be in [0, 1]");
        }
        const auto& bb = d.at("bbox");
        if (!bb.is_array() || bb.size() != 4) {
          throw ParseError(filename, line_no, "bbox must be [x_min, y_min, x_max, y_max]");
        }
        rec.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                    bb[3].get<double>()};
        if (!rec.bbox.valid()) {
          throw ParseError(filename, line_no, "bbox must satisfy min < max");
        }
        for (const auto& g : d.at("grasps")) {
          const auto& r = g.at("rect");
          if (!r.is_array() || r.size() != 5) {
            throw ParseError(filename, line_no, "grasp rect must be [x, y, w, h, theta]");
          }
          ScoredGrasp sg;
          try {
            sg.rect = OrientedRect(r[0].get<double>(), r[1].get<double>(),
                                   r[2].get<double>(), r[3].get<double>(),
                                   r[4].get<double>());
          } catch (const ValidationError& e) {
            throw ParseError(filename, line_no, e.what());
          }
          sg.score = g.at("score").get<double>();
          if (!std::isfinite(sg.score) || sg.score < 0.0 || sg.score > 1.0) {
            throw ParseError(filename, line_no, "grasp score must be in [0, 1]");
          }
          rec.grasps.push_back(std::move(sg));
        }
        records.push_back(std::move(rec));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(filename, line_no, e.what());
    }
  }
  return records;
}

std::string write_detection_file(const std::vector<DetectionRecord>& records) {
  // first-appearance order of image ids
  std::vector<std::string> order;
  std::map<std::string, std::vector<const DetectionRecord*>> grouped;
  for (const auto& rec : records) {
    auto [it, inserted] = grouped.try_emplace(rec.image_id);
    if (inserted) order.push_back(rec.image_id);
    it->second.push_back(&rec);
  }
  std::string out;
  for (const auto& id : order) {
    ordered_json doc;
    doc["image_id"] = id;
    doc["detections"] = ordered_json::array();
    for (const DetectionRecord* rec : grouped[id]) {
      ordered_json d;
      d["category"] = rec->category;
      d["score"] = rec->score;
      d["bbox"] = {rec->bbox.x_min, rec->bbox.y_min, rec->bbox.x_max, rec->bbox.y_max};
      d["grasps"] = ordered_json::array();
      for (const auto& g : rec->grasps) {
        ordered_json gj;
        gj["rect"] = {g.rect.x, g.rect.y, g.rect.w, g.rect.h, g.rect.theta};
        gj["score"] = g.score;
        d["grasps"].push_back(std::move(gj));
      }
      doc["detections"].push_back(std::move(d));
    }
    out += doc.dump();
    out += '\n';
  }
  return out;
}

}  // namespace roigd
