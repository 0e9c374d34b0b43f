#include "roigd/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "roigd/io_util.hpp"

namespace roigd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mm_to_m(double mm) {
  if (!std::isfinite(mm) || mm <= 0.0) return kNaN;
  return mm / 1000.0;
}

DepthMap parse_pgm(const std::string& bytes, const std::string& name,
                   const Intrinsics& intr) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5") {
    throw ParseError(name + ": expected PGM magic P2 or P5");
  }
  auto next_header_int = [&](const char* what) {
    // skip whitespace and '#' comments
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = 0;
    if (!(in >> v) || v < 0) {
      throw ParseError(name + ": bad PGM header field: " + what);
    }
    return v;
  };
  const long width = next_header_int("width");
  const long height = next_header_int("height");
  const long maxval = next_header_int("maxval");
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw ParseError(name + ": unsupported PGM dimensions or maxval");
  }
  DepthMap d;
  d.width = static_cast<int>(width);
  d.height = static_cast<int>(height);
  d.intr = intr;
  d.values.resize(static_cast<std::size_t>(width) * height);
  if (magic == "P2") {
    for (auto& v : d.values) {
      long raw = 0;
      if (!(in >> raw)) throw ParseError(name + ": truncated P2 pixel data");
      v = mm_to_m(static_cast<double>(raw));
    }
  } else {
    in.get();  // single whitespace after maxval
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<char> raw(d.values.size() * bytes_per);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw ParseError(name + ": truncated P5 pixel data");
    }
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      unsigned value;
      if (bytes_per == 2) {  // big-endian per PGM convention
        value = (static_cast<unsigned char>(raw[2 * i]) << 8) |
                static_cast<unsigned char>(raw[2 * i + 1]);
      } else {
        value = static_cast<unsigned char>(raw[i]);
      }
      d.values[i] = mm_to_m(static_cast<double>(value));
    }
  }
  return d;
}

DepthMap parse_text_depth(const std::string& text, const std::string& name,
                          const Intrinsics& intr) {
  std::istringstream in(text);
  long width = 0;
  long height = 0;
  if (!(in >> width >> height) || width <= 0 || height <= 0) {
    throw ParseError(name + ": expected 'width height' header");
  }
  DepthMap d;
  d.width = static_cast<int>(width);
  d.height = static_cast<int>(height);
  d.intr = intr;
  d.values.resize(static_cast<std::size_t>(width) * height);
  for (auto& v : d.values) {
    double mm = 0.0;
    if (!(in >> mm)) throw ParseError(name + ": truncated depth matrix");
    v = mm_to_m(mm);
  }
  return d;
}

}  // namespace

PixelDepth min_depth_point(const OrientedRect& rect, const DepthMap& d) {
  // scan the rectangle's bounding box only
  const QuadVertices q = rect_to_vertices(rect);
  double x_min = q[0].x, x_max = q[0].x, y_min = q[0].y, y_max = q[0].y;
  for (const auto& v : q) {
    x_min = std::min(x_min, v.x);
    x_max = std::max(x_max, v.x);
    y_min = std::min(y_min, v.y);
    y_max = std::max(y_max, v.y);
  }
  const int u0 = std::max(0, static_cast<int>(std::ceil(x_min)));
  const int u1 = std::min(d.width - 1, static_cast<int>(std::floor(x_max)));
  const int v0 = std::max(0, static_cast<int>(std::ceil(y_min)));
  const int v1 = std::min(d.height - 1, static_cast<int>(std::floor(y_max)));

  PixelDepth best;
  bool found = false;
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      const double z = d.at(u, v);
      if (!std::isfinite(z)) continue;
      if (!contains_point(rect, {static_cast<double>(u), static_cast<double>(v)})) {
        continue;
      }
      if (!found || z < best.depth) {  // strict: ties keep the smaller (v, u)
        best = {u, v, z};
        found = true;
      }
    }
  }
  if (!found) {
    throw NoValidDepth("no finite depth pixel inside the grasp rectangle");
  }
  return best;
}

std::array<double, 3> surface_normal(const DepthMap& d, int u, int v, int radius) {
  std::vector<Eigen::Vector3d> pts;
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      const int uu = u + du;
      const int vv = v + dv;
      if (!d.in_bounds(uu, vv)) continue;
      const double z = d.at(uu, vv);
      if (!std::isfinite(z)) continue;
      const auto p = back_project(d.intr, uu, vv, z);
      pts.emplace_back(p[0], p[1], p[2]);
    }
  }
  if (pts.size() < 3) {
    throw DegenerateNeighborhood("fewer than 3 valid depth pixels in the window");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d q = p - centroid;
    cov += q * q.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const auto& evals = eig.eigenvalues();  // ascending
  if (!(evals[1] > 1e-10 * std::max(evals[2], 1e-30))) {
    throw DegenerateNeighborhood("neighborhood points are collinear");
  }
  Eigen::Vector3d n = eig.eigenvectors().col(0);
  n.normalize();
  // camera-facing convention
  if (n.z() > 0.0 || (n.z() == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && n.y() < 0.0)))) {
    n = -n;
  }
  return {n.x(), n.y(), n.z()};
}

GraspPose grasp_pose(const OrientedRect& rect, const DepthMap& d, int radius) {
  const PixelDepth px = min_depth_point(rect, d);
  GraspPose pose;
  pose.point = back_project(d.intr, px.u, px.v, px.depth);
  pose.normal = surface_normal(d, px.u, px.v, radius);
  pose.pixel = {px.u, px.v};
  return pose;
}

std::array<double, 3> back_project(const Intrinsics& intr, double u, double v, double z) {
  return {(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z};
}

DepthMap load_depth(const std::filesystem::path& path, const Intrinsics& intr) {
  const std::string bytes = slurp_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
    return parse_pgm(bytes, path.string(), intr);
  }
  return parse_text_depth(bytes, path.string(), intr);
}

Intrinsics load_intrinsics(const std::filesystem::path& path) {
  return parse_intrinsics(slurp_file(path), path.string());
}

Intrinsics parse_intrinsics(const std::string& text, const std::string& filename) {
  try {
    const auto doc = nlohmann::json::parse(text);
    Intrinsics intr{doc.at("fx").get<double>(), doc.at("fy").get<double>(),
                    doc.at("cx").get<double>(), doc.at("cy").get<double>()};
    if (!(intr.fx != 0.0) || !(intr.fy != 0.0)) {
      throw ParseError(filename + ": fx and fy must be nonzero");
    }
    return intr;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(filename + ": " + e.what());
  }
}

}  // namespace roigd
