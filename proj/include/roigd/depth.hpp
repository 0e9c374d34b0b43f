#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "roigd/geometry.hpp"

namespace roigd {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

// Row-major depth raster in meters; invalid pixels are NaN. Pixel (u, v)
// sits at continuous image coordinates (u, v) and back-projects to
// X = (u - cx) Z / fx, Y = (v - cy) Z / fy. Camera frame is right-handed
// with Z positive into the scene.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  Intrinsics intr;

  double at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  bool in_bounds(int u, int v) const {
    return u >= 0 && u < width && v >= 0 && v < height;
  }
};

struct PixelDepth {
  int u = 0;
  int v = 0;
  double depth = 0.0;
};

struct GraspPose {
  std::array<double, 3> point{};   // meters, camera frame
  std::array<double, 3> normal{};  // unit, camera-facing (z <= 0)
  std::array<int, 2> pixel{};      // source (u, v)
};

// Minimum finite depth over pixels whose centers lie in the rectangle;
// depth ties resolve to the smallest (v, u). Throws NoValidDepth when the
// rectangle covers no valid pixel.
PixelDepth min_depth_point(const OrientedRect& rect, const DepthMap& d);

// Total-least-squares plane normal over the valid pixels of the
// (2*radius+1)^2 window around (u, v), back-projected through the
// intrinsics; oriented toward the camera. Throws DegenerateNeighborhood on
// fewer than 3 usable points or a rank-deficient neighborhood.
std::array<double, 3> surface_normal(const DepthMap& d, int u, int v, int radius);

GraspPose grasp_pose(const OrientedRect& rect, const DepthMap& d, int radius = 5);

std::array<double, 3> back_project(const Intrinsics& intr, double u, double v, double z);

// Depth files hold millimeters and are converted to meters on load; zero
// means "no reading" and becomes NaN. Supported: 16-bit PGM (P5 big-endian
// or P2) and a plain text matrix ("width height" header, then values,
// "nan" allowed).
DepthMap load_depth(const std::filesystem::path& path, const Intrinsics& intr);

// Intrinsics sidecar: JSON {"fx": ..., "fy": ..., "cx": ..., "cy": ...}.
Intrinsics load_intrinsics(const std::filesystem::path& path);
Intrinsics parse_intrinsics(const std::string& text, const std::string& filename);

}  // namespace roigd
