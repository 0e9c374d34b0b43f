#pragma once

#include <array>

#include "roigd/errors.hpp"

namespace roigd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Angles are degrees everywhere. Grasp rectangles are 180-degree periodic,
// so canonical angles live in (-90, 90].
double normalize_angle_deg(double deg);

// Periodic angular distance on R mod 180, in [0, 90].
double angle_distance(double theta_a, double theta_b);

// Oriented grasp rectangle in image coordinates (origin top-left, y down).
// (x, y) is the center; w extends along the theta direction (the gripper
// opening axis) and h perpendicular to it; theta is normalized to (-90, 90].
struct OrientedRect {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;
  double theta = 0.0;

  OrientedRect() = default;
  OrientedRect(double x, double y, double w, double h, double theta_deg);

  double area() const { return w * h; }
};

struct AxisAlignedBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
  bool valid() const;
};

// Four corners in traversal order. rect_to_vertices starts at the corner
// with local coordinates (-w/2, -h/2).
using QuadVertices = std::array<Vec2, 4>;

QuadVertices rect_to_vertices(const OrientedRect& r);

// Inverse of rect_to_vertices up to vertex relabeling: center is the vertex
// centroid, w is the mean length of the first/third edges, h of the
// second/fourth, theta the direction of the first edge (v1 -> v2).
// Throws NotARectangle when opposite edge lengths mismatch relatively by
// more than rect_tol or an adjacent edge pair deviates from perpendicular
// by more than |cos| <= rect_tol allows.
OrientedRect vertices_to_rect(const QuadVertices& q, double rect_tol = 0.02);

// Jaccard index of two oriented rectangles: intersection area by convex
// polygon clipping over union area. Symmetric, in [0, 1].
double rotated_iou(const OrientedRect& a, const OrientedRect& b);

double box_iou(const AxisAlignedBox& a, const AxisAlignedBox& b);

// Boundary-inclusive point containment (1e-9 slack in the local frame).
bool contains_point(const OrientedRect& r, Vec2 p);

// Equality up to the (w,h,theta) <-> (h,w,theta+-90) relabeling.
bool approx_equal(const OrientedRect& a, const OrientedRect& b, double tol);

}  // namespace roigd
