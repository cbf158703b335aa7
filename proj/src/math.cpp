#include "manip/math.hpp"

#include <algorithm>
#include <cmath>

namespace manip {

double Rng::gaussian() {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingularIntrinsics: return "SingularIntrinsics";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::DegenerateHeatmap: return "DegenerateHeatmap";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnlabeledPoint: return "UnlabeledPoint";
    case ErrorCode::TooLong: return "TooLong";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::Syntax: return "Syntax";
    case ErrorCode::UnknownPrimitive: return "UnknownPrimitive";
    case ErrorCode::BadKeyword: return "BadKeyword";
    case ErrorCode::UnterminatedString: return "UnterminatedString";
    case ErrorCode::UnvalidatedPlan: return "UnvalidatedPlan";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::UnknownPart: return "UnknownPart";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::OutOfWorkspace: return "OutOfWorkspace";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::MissingObject: return "MissingObject";
    case ErrorCode::MissingTarget: return "MissingTarget";
    case ErrorCode::UnreachableWaypoint: return "UnreachableWaypoint";
    case ErrorCode::UnknownTask: return "UnknownTask";
    case ErrorCode::OracleFailure: return "OracleFailure";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

Aabb Obb::bounding_aabb() const {
  Vec3 extent = rotation.cwiseAbs() * half_extents;
  return Aabb{center - extent, center + extent};
}

Vec3 Obb::corner(int i) const {
  Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
  return center + rotation * sign.cwiseProduct(half_extents);
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w == 360.0 ? 0.0 : w;
}

double circular_distance_deg(double a, double b) {
  double d = std::abs(wrap_degrees(a) - wrap_degrees(b));
  return std::min(d, 360.0 - d);
}

Quat euler_deg_to_quat(const Vec3& euler_deg) {
  Eigen::AngleAxisd rx(euler_deg.x() * kDegToRad, Vec3::UnitX());
  Eigen::AngleAxisd ry(euler_deg.y() * kDegToRad, Vec3::UnitY());
  Eigen::AngleAxisd rz(euler_deg.z() * kDegToRad, Vec3::UnitZ());
  return (rz * ry * rx).normalized();
}

Vec3 quat_to_euler_deg(const Quat& q) {
  // R = Rz * Ry * Rx  =>  eulerAngles(2,1,0) yields (z, y, x)
  Vec3 zyx = q.toRotationMatrix().eulerAngles(2, 1, 0);
  return Vec3(wrap_degrees(zyx.z() * kRadToDeg), wrap_degrees(zyx.y() * kRadToDeg),
              wrap_degrees(zyx.x() * kRadToDeg));
}

std::optional<double> segment_obb_entry(const Vec3& a, const Vec3& b, const Obb& box) {
  // Slab intersection in the box frame.
  Vec3 p0 = box.rotation.transpose() * (a - box.center);
  Vec3 d = box.rotation.transpose() * (b - a);
  double t_enter = 0.0;
  double t_exit = 1.0;
  for (int k = 0; k < 3; ++k) {
    double lo = -box.half_extents[k];
    double hi = box.half_extents[k];
    if (std::abs(d[k]) < 1e-12) {
      if (p0[k] < lo || p0[k] > hi) return std::nullopt;
      continue;
    }
    double t0 = (lo - p0[k]) / d[k];
    double t1 = (hi - p0[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter > t_exit) return std::nullopt;
  }
  return t_enter;
}

bool obb_overlap(const Obb& a, const Obb& b) {
  // Separating axis test: 3 face axes each + 9 edge cross products.
  Mat3 ra = a.rotation;
  Mat3 rb = b.rotation;
  Vec3 t = b.center - a.center;
  auto separated = [&](const Vec3& axis) {
    double len = axis.norm();
    if (len < 1e-12) return false;
    Vec3 n = axis / len;
    double proj_a = std::abs(n.dot(ra.col(0))) * a.half_extents.x() +
                    std::abs(n.dot(ra.col(1))) * a.half_extents.y() +
                    std::abs(n.dot(ra.col(2))) * a.half_extents.z();
    double proj_b = std::abs(n.dot(rb.col(0))) * b.half_extents.x() +
                    std::abs(n.dot(rb.col(1))) * b.half_extents.y() +
                    std::abs(n.dot(rb.col(2))) * b.half_extents.z();
    return std::abs(n.dot(t)) > proj_a + proj_b + 1e-12;
  };
  for (int i = 0; i < 3; ++i) {
    if (separated(ra.col(i))) return false;
    if (separated(rb.col(i))) return false;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (separated(ra.col(i).cross(rb.col(j)))) return false;
  return true;
}

namespace {

// Closest point on an OBB to p.
Vec3 obb_closest_point(const Obb& box, const Vec3& p) {
  Vec3 local = box.rotation.transpose() * (p - box.center);
  local = local.cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
  return box.center + box.rotation * local;
}

}  // namespace

double obb_distance(const Obb& a, const Obb& b) {
  if (obb_overlap(a, b)) return 0.0;
  double best = std::numeric_limits<double>::max();
  // Iterate closest-point projections from a small deterministic seed set:
  // corners plus face centers of each box against the other.
  auto improve = [&](const Vec3& seed, const Obb& from, const Obb& to) {
    Vec3 q = obb_closest_point(to, seed);
    Vec3 r = obb_closest_point(from, q);
    // one extra alternation tightens the pair
    Vec3 q2 = obb_closest_point(to, r);
    best = std::min(best, (q2 - r).norm());
  };
  for (int i = 0; i < 8; ++i) {
    improve(a.corner(i), a, b);
    improve(b.corner(i), b, a);
  }
  for (int k = 0; k < 3; ++k) {
    for (double s : {-1.0, 1.0}) {
      Vec3 fa = a.center + a.rotation.col(k) * (s * a.half_extents[k]);
      Vec3 fb = b.center + b.rotation.col(k) * (s * b.half_extents[k]);
      improve(fa, a, b);
      improve(fb, b, a);
    }
  }
  improve(a.center, a, b);
  improve(b.center, b, a);
  return best;
}

}  // namespace manip
