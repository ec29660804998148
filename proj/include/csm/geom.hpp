#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace csm {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

bool is_finite(const Vec3& v);

/// Direction on the unit sphere. Construction enforces |norm - 1| <= 1e-9.
class UnitVec3 {
 public:
  static constexpr double kNormTolerance = 1e-9;

  /// Normalizes `v`. Throws std::invalid_argument for zero or non-finite input.
  static UnitVec3 normalized(const Vec3& v);
  /// Accepts `v` only if it is already unit-norm within tolerance.
  static UnitVec3 from_unit(const Vec3& v);

  UnitVec3() : v_(1.0, 0.0, 0.0) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const UnitVec3& other) const { return v_.dot(other.v_); }
  UnitVec3 operator-() const { return UnitVec3(-v_); }

 private:
  explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Angle between two directions in degrees, in [0, 180].
double angle_between_deg(const UnitVec3& a, const UnitVec3& b);

/// Hamilton quaternion, scalar first. Represents an active body -> map rotation.
struct Quaternion {
  static constexpr double kNormTolerance = 1e-9;

  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  /// Throws std::invalid_argument on a zero or non-finite quaternion.
  static Quaternion normalized(double w, double x, double y, double z);
  static Quaternion from_axis_angle(const Vec3& axis, double angle_rad);
  static Quaternion from_yaw(double yaw_rad);

  double norm() const;
  bool is_unit() const;
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Vec3 rotate(const Vec3& v) const;
  /// Yaw (rotation about map z) of the body x axis, radians.
  double yaw() const;
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);

/// Spherical linear interpolation; takes the short arc.
Quaternion slerp(const Quaternion& a, const Quaternion& b, double s);

struct Pose {
  Vec3 position = Vec3::Zero();
  Quaternion orientation;
};

/// Closest approach between two lines given by origin + G * direction.
struct TriangulationResult {
  Vec3 point = Vec3::Zero();
  double gap = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  // 1 - (dir1 . dir2)^2 <= eps. point/gap/g1/g2 are then a fallback and
  // must not be trusted as a closest-approach solution.
  bool degenerate = false;
  // G1 < 0 or G2 < 0: the estimate lies behind at least one ray origin.
  bool behind = false;
};

namespace geom {

inline constexpr double kDefaultDegeneracyEps = 1e-6;

UnitVec3 rotate_to_map(const Pose& pose, const UnitVec3& local_dir);
UnitVec3 rotate_to_body(const Pose& pose, const UnitVec3& map_dir);

/// Ray to Ray triangulation: midpoint of the shortest segment between the
/// lines origin1 + G1 dir1 and origin2 + G2 dir2.
TriangulationResult ray_to_ray(const Vec3& origin1, const UnitVec3& dir1,
                               const Vec3& origin2, const UnitVec3& dir2,
                               double eps = kDefaultDegeneracyEps);

/// Angle at `source` between the lines to p1 and p2, degrees in [0, 180].
/// Throws std::domain_error when source coincides with p1 or p2.
double baseline_angle(const Vec3& source, const Vec3& p1, const Vec3& p2);

/// Root square error: Euclidean distance between estimate and truth.
double rse(const Vec3& estimate, const Vec3& truth);

}  // namespace geom
}  // namespace csm
