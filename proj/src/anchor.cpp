#include "roigd/anchor.hpp"

#include <cmath>

namespace roigd {

double anchor_angle(int m, int k) {
  return -90.0 + (m + 0.5) * (180.0 / k);
}

AnchorGrid build_anchor_grid(const AxisAlignedBox& roi, const AnchorSpec& spec) {
  if (!roi.valid()) throw ValidationError("build_anchor_grid: invalid RoI");
  if (spec.grid_w < 1 || spec.grid_h < 1 || spec.k < 1 || !(spec.anchor_size > 0.0)) {
    throw ValidationError("build_anchor_grid: invalid AnchorSpec");
  }
  AnchorGrid grid{roi, spec, {}};
  grid.anchors.reserve(static_cast<std::size_t>(spec.grid_w) * spec.grid_h * spec.k);
  const double cell_w = roi.width() / spec.grid_w;
  const double cell_h = roi.height() / spec.grid_h;
  for (int j = 0; j < spec.grid_h; ++j) {
    for (int i = 0; i < spec.grid_w; ++i) {
      const double cx = roi.x_min + (i + 0.5) * cell_w;
      const double cy = roi.y_min + (j + 0.5) * cell_h;
      for (int m = 0; m < spec.k; ++m) {
        grid.anchors.emplace_back(cx, cy, spec.anchor_size, spec.anchor_size,
                                  anchor_angle(m, spec.k));
      }
    }
  }
  return grid;
}

GraspOffsets encode(const OrientedRect& grasp, const OrientedRect& anchor, int k) {
  GraspOffsets t;
  t.tx = (grasp.x - anchor.x) / anchor.w;
  t.ty = (grasp.y - anchor.y) / anchor.h;
  t.tw = std::log(grasp.w / anchor.w);
  t.th = std::log(grasp.h / anchor.h);
  t.ttheta = normalize_angle_deg(grasp.theta - anchor.theta) / (90.0 / k);
  return t;
}

OrientedRect decode(const GraspOffsets& offsets, const OrientedRect& anchor, int k) {
  return OrientedRect(offsets.tx * anchor.w + anchor.x,
                      offsets.ty * anchor.h + anchor.y,
                      anchor.w * std::exp(offsets.tw),
                      anchor.h * std::exp(offsets.th),
                      offsets.ttheta * (90.0 / k) + anchor.theta);
}

}  // namespace roigd
