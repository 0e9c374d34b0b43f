#include "roigd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace roigd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSliverArea = 1e-12;

double deg2rad(double d) { return d * (kPi / 180.0); }

double shoelace_area(const std::vector<Vec2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

double quad_area(const QuadVertices& q) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = q[i];
    const Vec2& b = q[(i + 1) % 4];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

// Clips `poly` against the half-plane left of edge a->b (Sutherland-Hodgman
// step; rect_to_vertices orientation keeps the interior on that side).
std::vector<Vec2> clip_against_edge(const std::vector<Vec2>& poly, Vec2 a, Vec2 b) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  const Vec2 e = b - a;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& cur = poly[i];
    const Vec2& nxt = poly[(i + 1) % n];
    const double dc = cross(e, cur - a);
    const double dn = cross(e, nxt - a);
    const bool cur_in = dc >= 0.0;
    const bool nxt_in = dn >= 0.0;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = dc / (dc - dn);
      out.push_back(cur + (nxt - cur) * t);
    }
  }
  return out;
}

double intersection_area(const QuadVertices& subject, const QuadVertices& clip) {
  std::vector<Vec2> poly(subject.begin(), subject.end());
  for (int i = 0; i < 4 && !poly.empty(); ++i) {
    poly = clip_against_edge(poly, clip[i], clip[(i + 1) % 4]);
  }
  const double a = std::abs(shoelace_area(poly));
  return a < kSliverArea ? 0.0 : a;
}

// Valid only when theta is exactly 0 or 90.
AxisAlignedBox to_axis_aligned(const OrientedRect& r) {
  const double hw = r.theta == 0.0 ? 0.5 * r.w : 0.5 * r.h;
  const double hh = r.theta == 0.0 ? 0.5 * r.h : 0.5 * r.w;
  return {r.x - hw, r.y - hh, r.x + hw, r.y + hh};
}

}  // namespace

double normalize_angle_deg(double deg) {
  double r = std::remainder(deg, 180.0);  // in [-90, 90]
  if (r <= -90.0) r += 180.0;
  return r;
}

double angle_distance(double theta_a, double theta_b) {
  return std::abs(std::remainder(theta_a - theta_b, 180.0));
}

OrientedRect::OrientedRect(double x_, double y_, double w_, double h_, double theta_deg)
    : x(x_), y(y_), w(w_), h(h_), theta(normalize_angle_deg(theta_deg)) {
  if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
        std::isfinite(theta)) ||
      w <= 0.0 || h <= 0.0) {
    throw ValidationError("OrientedRect: fields must be finite with w > 0 and h > 0");
  }
}

bool AxisAlignedBox::valid() const {
  return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
         std::isfinite(y_max) && x_min < x_max && y_min < y_max;
}

QuadVertices rect_to_vertices(const OrientedRect& r) {
  const double rad = deg2rad(r.theta);
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double hw = 0.5 * r.w;
  const double hh = 0.5 * r.h;
  const std::array<Vec2, 4> local{{{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}}};
  QuadVertices out;
  for (int i = 0; i < 4; ++i) {
    out[i] = {r.x + local[i].x * c - local[i].y * s,
              r.y + local[i].x * s + local[i].y * c};
  }
  return out;
}

OrientedRect vertices_to_rect(const QuadVertices& q, double rect_tol) {
  std::array<Vec2, 4> e;
  for (int i = 0; i < 4; ++i) e[i] = q[(i + 1) % 4] - q[i];
  std::array<double, 4> len;
  for (int i = 0; i < 4; ++i) {
    len[i] = std::hypot(e[i].x, e[i].y);
    if (!(len[i] > 0.0)) throw NotARectangle("degenerate quad: zero-length edge");
  }
  if (std::abs(quad_area(q)) < kSliverArea) {
    throw NotARectangle("degenerate quad: zero area");
  }
  for (int i = 0; i < 2; ++i) {
    const double mismatch = std::abs(len[i] - len[i + 2]) / std::max(len[i], len[i + 2]);
    if (mismatch > rect_tol) {
      throw NotARectangle("opposite edge lengths differ by " + std::to_string(mismatch));
    }
  }
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    const double cosang = std::abs(dot(e[i], e[j])) / (len[i] * len[j]);
    if (cosang > rect_tol) {
      throw NotARectangle("adjacent edges not perpendicular (|cos| = " +
                          std::to_string(cosang) + ")");
    }
  }
  const double cx = 0.25 * (q[0].x + q[1].x + q[2].x + q[3].x);
  const double cy = 0.25 * (q[0].y + q[1].y + q[2].y + q[3].y);
  const double w = 0.5 * (len[0] + len[2]);
  const double h = 0.5 * (len[1] + len[3]);
  const double theta = std::atan2(e[0].y, e[0].x) * (180.0 / kPi);
  return OrientedRect(cx, cy, w, h, theta);
}

double rotated_iou(const OrientedRect& a, const OrientedRect& b) {
  const bool a_axis = a.theta == 0.0 || a.theta == 90.0;
  const bool b_axis = b.theta == 0.0 || b.theta == 90.0;
  if (a_axis && b_axis) {
    return box_iou(to_axis_aligned(a), to_axis_aligned(b));
  }
  const QuadVertices pa = rect_to_vertices(a);
  const QuadVertices pb = rect_to_vertices(b);
  std::vector<Vec2> poly_a(pa.begin(), pa.end());
  const double area_a = std::abs(shoelace_area(poly_a));
  std::vector<Vec2> poly_b(pb.begin(), pb.end());
  const double area_b = std::abs(shoelace_area(poly_b));
  const double inter = intersection_area(pa, pb);
  if (inter <= 0.0) return 0.0;
  const double uni = area_a + area_b - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double box_iou(const AxisAlignedBox& a, const AxisAlignedBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

bool contains_point(const OrientedRect& r, Vec2 p) {
  const double rad = deg2rad(r.theta);
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const double dx = p.x - r.x;
  const double dy = p.y - r.y;
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  constexpr double eps = 1e-9;
  return std::abs(u) <= 0.5 * r.w + eps && std::abs(v) <= 0.5 * r.h + eps;
}

bool approx_equal(const OrientedRect& a, const OrientedRect& b, double tol) {
  if (std::abs(a.x - b.x) > tol || std::abs(a.y - b.y) > tol) return false;
  const bool direct = std::abs(a.w - b.w) <= tol && std::abs(a.h - b.h) <= tol &&
                      angle_distance(a.theta, b.theta) <= tol;
  const bool swapped = std::abs(a.w - b.h) <= tol && std::abs(a.h - b.w) <= tol &&
                       angle_distance(a.theta, b.theta + 90.0) <= tol;
  return direct || swapped;
}

}  // namespace roigd
