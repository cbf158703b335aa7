#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <optional>

#include "manip/common.hpp"

namespace manip {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform (rotation + translation), stored as unit quaternion.
struct Pose {
  Quat rotation = Quat::Identity();
  Vec3 position = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + position; }
  Vec3 apply_inverse(const Vec3& p) const { return rotation.conjugate() * (p - position); }

  Pose compose(const Pose& rhs) const {
    return Pose{(rotation * rhs.rotation).normalized(), rotation * rhs.position + position};
  }
  Pose inverse() const {
    Quat qi = rotation.conjugate();
    return Pose{qi, -(qi * position)};
  }

  static Pose identity() { return Pose{}; }
  static Pose translation(const Vec3& t) { return Pose{Quat::Identity(), t}; }
};

/// Axis-aligned box, closed bounds.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y() &&
           p.z() >= min.z() && p.z() <= max.z();
  }
  Vec3 center() const { return 0.5 * (min + max); }
  Vec3 clamp(const Vec3& p) const { return p.cwiseMax(min).cwiseMin(max); }
  bool valid() const { return (min.array() < max.array()).all(); }
};

/// Oriented box: center, half extents, rotation (box frame -> parent frame).
struct Obb {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();

  bool contains(const Vec3& p) const {
    Vec3 local = rotation.transpose() * (p - center);
    return std::abs(local.x()) <= half_extents.x() && std::abs(local.y()) <= half_extents.y() &&
           std::abs(local.z()) <= half_extents.z();
  }

  Obb transformed(const Pose& pose) const {
    return Obb{pose.apply(center), half_extents, pose.rotation.toRotationMatrix() * rotation};
  }

  /// Distance from a point to the box surface (0 inside).
  double distance(const Vec3& p) const {
    Vec3 local = (rotation.transpose() * (p - center)).cwiseAbs() - half_extents;
    return local.cwiseMax(0.0).norm();
  }

  Aabb bounding_aabb() const;
  Vec3 corner(int i) const;
};

constexpr double kDegToRad = 0.017453292519943295;
constexpr double kRadToDeg = 57.29577951308232;

/// Normalize an angle in degrees into [0, 360).
double wrap_degrees(double deg);

/// Circular distance between two angles in degrees, in [0, 180].
double circular_distance_deg(double a, double b);

/// Euler angles (degrees, applied X then Y then Z about fixed world axes)
/// to rotation: R = Rz * Ry * Rx.
Quat euler_deg_to_quat(const Vec3& euler_deg);

/// Inverse of euler_deg_to_quat; components wrapped into [0, 360).
Vec3 quat_to_euler_deg(const Quat& q);

/// First parameter t in [0,1] where segment a+t*(b-a) enters the box, or
/// nullopt when the segment misses it. t=0 when the start is already inside.
std::optional<double> segment_obb_entry(const Vec3& a, const Vec3& b, const Obb& box);

/// True when two oriented boxes overlap (separating axis test).
bool obb_overlap(const Obb& a, const Obb& b);

/// Approximate surface-to-surface distance between oriented boxes
/// (0 when overlapping; otherwise min over corner/point samples).
double obb_distance(const Obb& a, const Obb& b);

}  // namespace manip
