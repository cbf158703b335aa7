#include "manip/controller.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

namespace manip::ctrl {

namespace {

Vec3 direction_vector(dsl::Direction dir) {
  switch (dir) {
    case dsl::Direction::Up: return Vec3(0, 0, 1);
    case dsl::Direction::Down: return Vec3(0, 0, -1);
    case dsl::Direction::Forward: return Vec3(1, 0, 0);
    case dsl::Direction::Out: return Vec3(-1, 0, 0);
  }
  return Vec3::Zero();
}

struct Builder {
  const ControllerParams& params;
  std::vector<codec::GripperAction> steps;
  Vec3 rotation;
  bool open;

  Builder(const ControlRequest& req, const ControllerParams& p)
      : params(p), rotation(quat_to_euler_deg(req.gripper_pose.rotation)), open(req.gripper_open) {}

  void add(const Vec3& position, bool open_state) {
    codec::GripperAction action;
    action.position = params.workspace.aabb.valid() ? params.workspace.aabb.clamp(position)
                                                    : position;
    action.rotation_euler_deg = rotation;
    action.open = open_state;
    action.normalize_rotation();
    steps.push_back(action);
    open = open_state;
  }
};

const geom::PointCloud& require_object(const ControlRequest& req) {
  if (!req.object_cloud || req.object_cloud->empty())
    raise(ErrorCode::MissingObject,
          std::string(dsl::primitive_name(req.primitive)) + ": object cloud required");
  return *req.object_cloud;
}

}  // namespace

ControlResult plan_motion(const ControlRequest& req, const ControllerParams& params) {
  Builder b(req, params);
  const Vec3 start = req.gripper_pose.position;

  switch (req.primitive) {
    case dsl::Primitive::Grasp: {
      const geom::PointCloud& object = require_object(req);
      Vec3 grasp_point = object.centroid();
      b.add(grasp_point + Vec3(0, 0, params.approach_height), true);
      b.add(grasp_point, true);
      b.add(grasp_point, false);
      break;
    }
    case dsl::Primitive::MoveGraspedObject: {
      if (req.direction) {
        b.add(start + direction_vector(*req.direction) * params.dir_step, false);
        break;
      }
      if (!req.target_cloud || req.target_cloud->empty())
        raise(ErrorCode::MissingTarget, "move_grasped_object: target cloud required");
      // The held object's extent below the gripper decides the final height.
      double held_drop = 0.0;
      if (req.object_cloud && !req.object_cloud->empty())
        held_drop = start.z() - req.object_cloud->bounds().min.z();
      Vec3 target_centroid = req.target_cloud->centroid();
      double target_top = req.target_cloud->bounds().max.z();
      double lift_z = std::max(start.z() + params.lift_height,
                               target_top + params.place_offset + held_drop);
      b.add(Vec3(start.x(), start.y(), lift_z), false);
      b.add(Vec3(target_centroid.x(), target_centroid.y(), lift_z), false);
      b.add(Vec3(target_centroid.x(), target_centroid.y(),
                 target_top + held_drop + params.drop_eps),
            false);
      break;
    }
    case dsl::Primitive::RotateGraspedObject: {
      // Rotate about the gripper approach axis (local -Z), in place.
      Vec3 approach = req.gripper_pose.rotation * Vec3(0, 0, -1);
      Quat spun = Quat(Eigen::AngleAxisd(params.rot_step_deg * kDegToRad, approach)) *
                  req.gripper_pose.rotation;
      b.rotation = quat_to_euler_deg(spun.normalized());
      b.add(start, b.open);
      break;
    }
    case dsl::Primitive::PushDown: {
      const geom::PointCloud& object = require_object(req);
      Vec3 top(object.centroid().x(), object.centroid().y(), object.bounds().max.z());
      double travel = object.bounds().max.z() - object.bounds().min.z();
      b.add(top + Vec3(0, 0, params.approach_height), b.open);
      b.add(top - Vec3(0, 0, travel + 0.005), b.open);
      break;
    }
    case dsl::Primitive::PushForward: {
      const geom::PointCloud& object = require_object(req);
      Vec3 centroid = object.centroid();
      Vec3 dir(1, 0, 0);
      double sweep;
      if (req.target_cloud && !req.target_cloud->empty()) {
        Vec3 target = req.target_cloud->centroid();
        Vec3 to_target = target - centroid;
        to_target.z() = 0.0;
        if (to_target.norm() > 1e-9) dir = to_target.normalized();
        sweep = to_target.norm();
      } else {
        sweep = params.push_step;
      }
      Aabb bounds = object.bounds();
      double radius = 0.5 * std::max(bounds.max.x() - bounds.min.x(),
                                     bounds.max.y() - bounds.min.y());
      Vec3 behind = centroid - dir * (radius + params.push_approach);
      behind.z() = centroid.z();
      b.add(behind, b.open);
      b.add(behind + dir * (radius + params.push_approach + sweep), b.open);
      break;
    }
    case dsl::Primitive::Release: {
      b.add(start, true);
      break;
    }
  }

  if (int(b.steps.size()) > params.max_trajectory_len)
    raise(ErrorCode::TooLong, "plan_motion: trajectory exceeds the step budget");
  ControlResult result;
  result.trajectory = std::move(b.steps);
  result.stop_at = int(result.trajectory.size()) - 1;
  return result;
}

namespace {

struct PosKey {
  double x, y, z;
  bool operator==(const PosKey&) const = default;
};

struct PosKeyHash {
  std::size_t operator()(const PosKey& k) const {
    auto mix = [](double v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      return bits;
    };
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t b : {mix(k.x), mix(k.y), mix(k.z)}) {
      h ^= b;
      h *= 0x100000001b3ull;
    }
    return std::size_t(h);
  }
};

std::unordered_set<PosKey, PosKeyHash> position_set(const geom::PointCloud* cloud) {
  std::unordered_set<PosKey, PosKeyHash> set;
  if (!cloud) return set;
  set.reserve(cloud->size());
  for (const auto& p : cloud->points)
    set.insert(PosKey{p.position.x(), p.position.y(), p.position.z()});
  return set;
}

}  // namespace

geom::PointCloud label_points(const geom::PointCloud& scene_cloud,
                              const geom::PointCloud* object_cloud,
                              const geom::PointCloud* target_cloud,
                              const geom::PointCloud* robot_cloud) {
  auto object_set = position_set(object_cloud);
  auto target_set = position_set(target_cloud);
  auto robot_set = position_set(robot_cloud);

  geom::PointCloud out = scene_cloud;
  for (auto& p : out.points) {
    PosKey key{p.position.x(), p.position.y(), p.position.z()};
    if (object_set.count(key)) p.label = geom::PointLabel::GoalObject;
    else if (target_set.count(key)) p.label = geom::PointLabel::GoalTarget;
    else if (robot_set.count(key)) p.label = geom::PointLabel::Robot;
    else p.label = geom::PointLabel::Obstacle;
  }
  return out;
}

}  // namespace manip::ctrl
