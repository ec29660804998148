#include "csm/geom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace csm {

bool is_finite(const Vec3& v) { return v.allFinite(); }

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n == 0.0) {
    throw std::invalid_argument("UnitVec3: cannot normalize a zero or non-finite vector");
  }
  return UnitVec3(v / n);
}

UnitVec3 UnitVec3::from_unit(const Vec3& v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("UnitVec3: vector is not unit-norm");
  }
  return UnitVec3(v);
}

double angle_between_deg(const UnitVec3& a, const UnitVec3& b) {
  return rad2deg(std::atan2(a.vec().cross(b.vec()).norm(), a.dot(b)));
}

Quaternion Quaternion::normalized(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!std::isfinite(n) || n == 0.0) {
    throw std::invalid_argument("Quaternion: cannot normalize a zero or non-finite quaternion");
  }
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle_rad) {
  const Vec3 a = UnitVec3::normalized(axis).vec();
  const double s = std::sin(0.5 * angle_rad);
  return normalized(std::cos(0.5 * angle_rad), a.x() * s, a.y() * s, a.z() * s);
}

Quaternion Quaternion::from_yaw(double yaw_rad) {
  return from_axis_angle(Vec3::UnitZ(), yaw_rad);
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

bool Quaternion::is_unit() const {
  return std::isfinite(norm()) && std::abs(norm() - 1.0) <= kNormTolerance;
}

Vec3 Quaternion::rotate(const Vec3& v) const {
  const Quaternion p{0.0, v.x(), v.y(), v.z()};
  const Quaternion r = (*this) * p * conjugate();
  return {r.x, r.y, r.z};
}

double Quaternion::yaw() const {
  const Vec3 fwd = rotate(Vec3::UnitX());
  return std::atan2(fwd.y(), fwd.x());
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion slerp(const Quaternion& a, const Quaternion& b, double s) {
  double cos_half = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  Quaternion end = b;
  if (cos_half < 0.0) {
    cos_half = -cos_half;
    end = {-b.w, -b.x, -b.y, -b.z};
  }
  double ka = 1.0 - s;
  double kb = s;
  if (cos_half < 1.0 - 1e-12) {
    const double half = std::acos(std::min(cos_half, 1.0));
    const double sin_half = std::sin(half);
    ka = std::sin((1.0 - s) * half) / sin_half;
    kb = std::sin(s * half) / sin_half;
  }
  return Quaternion::normalized(ka * a.w + kb * end.w, ka * a.x + kb * end.x,
                                ka * a.y + kb * end.y, ka * a.z + kb * end.z);
}

namespace geom {

UnitVec3 rotate_to_map(const Pose& pose, const UnitVec3& local_dir) {
  return UnitVec3::normalized(pose.orientation.rotate(local_dir.vec()));
}

UnitVec3 rotate_to_body(const Pose& pose, const UnitVec3& map_dir) {
  return UnitVec3::normalized(pose.orientation.conjugate().rotate(map_dir.vec()));
}

TriangulationResult ray_to_ray(const Vec3& origin1, const UnitVec3& dir1,
                               const Vec3& origin2, const UnitVec3& dir2, double eps) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("ray_to_ray: eps must be positive");
  }
  const Vec3& l1 = dir1.vec();
  const Vec3& l2 = dir2.vec();
  const Vec3 w = origin1 - origin2;
  const double c = l1.dot(l2);
  const double denom = 1.0 - c * c;

  TriangulationResult out;
  out.degenerate = denom <= eps;
  if (denom > 0.0) {
    out.g1 = (c * l2.dot(w) - l1.dot(w)) / denom;
    out.g2 = (c * l1.dot(-w) - l2.dot(-w)) / denom;
  } else {
    // Exactly parallel: anchor on origin1 and its foot on the second line.
    out.g1 = 0.0;
    out.g2 = l2.dot(w);
  }
  const Vec3 p1 = origin1 + out.g1 * l1;
  const Vec3 p2 = origin2 + out.g2 * l2;
  out.point = 0.5 * (p1 + p2);
  out.gap = (p1 - p2).norm();
  out.behind = out.g1 < 0.0 || out.g2 < 0.0;
  return out;
}

double baseline_angle(const Vec3& source, const Vec3& p1, const Vec3& p2) {
  const Vec3 a = p1 - source;
  const Vec3 b = p2 - source;
  if (a.norm() <= 1e-12 || b.norm() <= 1e-12) {
    throw std::domain_error("baseline_angle: robot position coincides with the source");
  }
  return angle_between_deg(UnitVec3::normalized(a), UnitVec3::normalized(b));
}

double rse(const Vec3& estimate, const Vec3& truth) { return (estimate - truth).norm(); }

}  // namespace geom
}  // namespace csm
