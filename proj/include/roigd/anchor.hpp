#pragma once

#include <cstddef>
#include <vector>

#include "roigd/geometry.hpp"

namespace roigd {

// W x H grid of k oriented square anchors over an RoI.
struct AnchorSpec {
  int grid_w = 7;
  int grid_h = 7;
  int k = 4;
  double anchor_size = 12.0;
};

// Regression offsets of a grasp rectangle relative to an anchor:
//   tx = (x - xa) / wa         ty = (y - ya) / ha
//   tw = log(w / wa)           th = log(h / ha)
//   ttheta = wrap(theta - theta_a) / (90 / k)
// with the angle difference wrapped into (-90, 90] before dividing.
struct GraspOffsets {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
  double ttheta = 0.0;
};

struct AnchorGrid {
  AxisAlignedBox roi;
  AnchorSpec spec;
  // Row-major cell order (cell index = j * grid_w + i), orientation-minor.
  std::vector<OrientedRect> anchors;

  std::size_t flat_index(int i, int j, int m) const {
    return (static_cast<std::size_t>(j) * spec.grid_w + i) * spec.k + m;
  }
  std::size_t size() const { return anchors.size(); }
};

// Anchor orientation m of k: -90 + (m + 0.5) * 180 / k. Evenly covers the
// 180-degree period so |ttheta| stays near [-1, 1] under the 90/k divisor.
double anchor_angle(int m, int k);

// Cell (i, j) centers the anchor at
// (x_min + (i + 0.5) * roi_w / W, y_min + (j + 0.5) * roi_h / H); all
// anchors are squares of side spec.anchor_size.
AnchorGrid build_anchor_grid(const AxisAlignedBox& roi, const AnchorSpec& spec);

GraspOffsets encode(const OrientedRect& grasp, const OrientedRect& anchor, int k);
OrientedRect decode(const GraspOffsets& offsets, const OrientedRect& anchor, int k);

}  // namespace roigd
