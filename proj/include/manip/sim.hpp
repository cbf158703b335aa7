#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "manip/grounding.hpp"
#include "manip/plan.hpp"

namespace manip::sim {

enum class JointKind { Revolute, Prismatic };  // degrees / meters

struct Joint {
  JointKind kind = JointKind::Prismatic;
  Vec3 axis = Vec3::UnitZ();  // unit vector, object frame
  double min = 0.0;
  double max = 0.0;
  double value = 0.0;

  void clamp() { value = std::min(std::max(value, min), max); }
  double range() const { return max - min; }
};

/// Object geometry in the object frame: a box, or a raw cloud.
using Geometry = std::variant<Obb, geom::PointCloud>;

struct SceneObject {
  std::string name;
  std::string category;
  std::string color;  // text tag; empty for uncolored fixtures
  Geometry geometry = Obb{};
  Pose pose;  // object -> world
  std::optional<Joint> joint;
  bool graspable = false;
  /// Anchored objects are articulated fixtures: the pose never changes and
  /// the joint value moves the geometry. Free jointed objects keep the joint
  /// as pure progress (screwing) while the pose moves rigidly.
  bool anchored = false;
  /// Invisible objects are marker regions for success predicates only.
  bool visible = true;

  std::string description() const { return color.empty() ? category : color + " " + category; }

  /// Object-frame transform contributed by the joint (anchored objects).
  Pose joint_local_transform() const;
  /// World-frame joint axis.
  Vec3 joint_axis_world() const;
  /// Box geometry in the world frame, joint transform applied. Cloud
  /// geometry yields its bounding box.
  Obb world_obb() const;
};

struct Gripper {
  Pose pose;
  bool open = true;
  std::optional<std::string> held;
  Pose held_offset;  // gripper -> object, fixed while held
};

struct Scene {
  std::map<std::string, SceneObject> objects;
  Gripper gripper;
  geom::Workspace workspace;
  std::uint64_t rng_seed = 0;
  std::vector<std::string> press_log;

  const SceneObject& object(const std::string& name) const;
  SceneObject& object(const std::string& name);
};

// --- success conditions ---------------------------------------------------

struct SuccessCondition;

struct JointAtLeast {
  std::string object;
  double fraction = 1.0;  // of the joint range above min
};
struct JointAtMost {
  std::string object;
  double fraction = 0.0;
};
struct Contains {
  std::string region;
  std::string content;
};
struct OnTopOfArea {
  std::string platform;
  std::vector<std::string> objects;
  int count = 1;
};
struct PressedInOrder {
  std::vector<std::string> buttons;
};
struct StackedInOrder {
  std::vector<std::string> objects;
};
struct InContact {
  std::string a;
  std::string b;
};
struct AllOf {
  std::vector<SuccessCondition> conditions;
};

struct SuccessCondition {
  std::variant<JointAtLeast, JointAtMost, Contains, OnTopOfArea, PressedInOrder, StackedInOrder,
               InContact, AllOf>
      condition;
};

// --- task specification ----------------------------------------------------

struct ObjectTemplate {
  SceneObject prototype;
  bool sample_position = false;
  Aabb sample_region;            // world-frame region for the object origin
  double min_separation = 0.06;  // meters, surface-to-surface, vs already placed
};

struct SceneTemplate {
  geom::Workspace workspace;
  Pose gripper_home;
  std::vector<ObjectTemplate> objects;
};

struct TaskSpec {
  std::string task_id;
  int variation = 0;
  std::string instruction;
  int level = 1;
  SceneTemplate scene_template;
  SuccessCondition success;
  std::string oracle_plan;  // DSL source text

  void check() const;  // oracle plan validates, success names resolve
};

struct SimParams {
  double grasp_radius = 0.04;
  double contact_eps = 0.005;
  double stack_radius = 0.03;
  double surface_density = 1.0e4;  // points per m^2
  int embed_dim = 32;
  double embed_noise = 0.02;
  int views = 2;
};

// --- operations -------------------------------------------------------------

/// Deterministic scene from (spec, seed); sampled placements use rejection
/// sampling with up to 1000 attempts per object.
Scene reset(const TaskSpec& spec, std::uint64_t seed, const SimParams& params = {});

struct GripperWaypoint {
  Vec3 position = Vec3::Zero();
  Vec3 rotation_euler_deg = Vec3::Zero();
  bool open = true;
};

/// Teleport the gripper along a straight segment to the waypoint and apply
/// the attach/detach, held-object, joint-drive, and push-sweep rules.
void apply_waypoint(Scene& scene, const GripperWaypoint& action, const SimParams& params = {});

bool evaluate_success(const Scene& scene, const SuccessCondition& condition,
                      const SimParams& params = {});

/// Append to the press log when the named button's prismatic joint sits at
/// its minimum.
void record_press(Scene& scene, const std::string& button);

struct Observation {
  geom::PointCloud cloud;           // surface samples of visible objects + gripper
  std::vector<std::string> owners;  // parallel to cloud.points; kGripperOwner for the gripper
  std::vector<ground::Detection> detections;
};

inline constexpr const char* kGripperOwner = "__gripper__";

/// Sample the scene's visible surfaces and synthesize per-view detections
/// with fixture embeddings.
Observation observe(const Scene& scene, const SimParams& params = {});

/// Deterministic grid sampling of a box surface at the given density.
geom::PointCloud sample_obb_surface(const Obb& box, double density,
                                    const std::array<std::uint8_t, 3>& color, double table_height);

// --- serialization ----------------------------------------------------------

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

std::string task_to_json(const TaskSpec& spec);
TaskSpec task_from_json(const std::string& text);

}  // namespace manip::sim
