#pragma once

#include <functional>
#include <optional>
#include <string>

#include "manip/codec.hpp"
#include "manip/grounding.hpp"
#include "manip/plan.hpp"

namespace manip::ctrl {

/// Everything the motion policy sees for one plan step: the primitive, the
/// grounded object/target clouds, the labeled scene cloud, and the gripper's
/// proprioceptive state.
struct ControlRequest {
  dsl::Primitive primitive = dsl::Primitive::Release;
  std::optional<geom::PointCloud> object_cloud;  // GoalObject
  std::optional<geom::PointCloud> target_cloud;  // GoalTarget
  std::optional<dsl::Direction> direction;
  geom::PointCloud scene_cloud;  // fully labeled
  Pose gripper_pose;
  bool gripper_open = true;
};

struct ControlResult {
  std::vector<codec::GripperAction> trajectory;  // length <= max_trajectory_len
  int stop_at = 0;                               // always trajectory.size() - 1
};

struct ControllerParams {
  int max_trajectory_len = 5;      // s
  double dir_step = 0.15;          // directional move distance, meters
  double rot_step_deg = 90.0;      // rotate_grasped_object angle
  double place_offset = 0.05;      // clearance above the target when moving
  double push_step = 0.10;         // untargeted push distance
  double approach_height = 0.08;   // pre-grasp height above the object
  double lift_height = 0.12;       // lift before a targeted move
  double drop_eps = 0.002;         // clearance when setting an object down
  double push_approach = 0.06;     // stand-off behind a pushed object
  geom::Workspace workspace;       // waypoints are clamped to this box
};

/// Plan a bounded waypoint trajectory realizing the primitive. Pure function
/// of the request; positions and labels only, colors never matter.
ControlResult plan_motion(const ControlRequest& request, const ControllerParams& params);

/// Label scene points by membership: object cloud points -> GoalObject,
/// target -> GoalTarget, robot cloud -> Robot, everything else -> Obstacle.
/// Membership is exact position identity (the clouds come from the same
/// observation).
geom::PointCloud label_points(const geom::PointCloud& scene_cloud,
                              const geom::PointCloud* object_cloud,
                              const geom::PointCloud* target_cloud,
                              const geom::PointCloud* robot_cloud);

// --- controller selection ----------------------------------------------------

using ControllerFn = std::function<ControlResult(const ControlRequest&)>;

/// Resolve a controller by config key: "heuristic" is the built-in planner;
/// "subprocess:<command>" runs the command through the shell per request,
/// writing the request JSON to its stdin and reading the result JSON from its
/// stdout (clouds travel as base64 binary PLY).
ControllerFn make_controller(const std::string& key, const ControllerParams& params);

std::string control_request_to_json(const ControlRequest& request);
ControlRequest control_request_from_json(const std::string& text);
std::string control_result_to_json(const ControlResult& result);
/// Parses and validates: 1 <= length <= max_len and stop_at = length - 1.
ControlResult control_result_from_json(const std::string& text, int max_len = 5);

}  // namespace manip::ctrl
