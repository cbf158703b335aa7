#include "manip/sim.hpp"

#include <algorithm>
#include <cmath>

namespace manip::sim {

Pose SceneObject::joint_local_transform() const {
  if (!joint || !anchored) return Pose::identity();
  if (joint->kind == JointKind::Prismatic) return Pose::translation(joint->axis * joint->value);
  return Pose{Quat(Eigen::AngleAxisd(joint->value * kDegToRad, joint->axis)), Vec3::Zero()};
}

Vec3 SceneObject::joint_axis_world() const {
  return joint ? Vec3(pose.rotation * joint->axis) : Vec3::UnitZ();
}

Obb SceneObject::world_obb() const {
  Pose world = pose.compose(joint_local_transform());
  if (const auto* box = std::get_if<Obb>(&geometry)) return box->transformed(world);
  const auto& cloud = std::get<geom::PointCloud>(geometry);
  Aabb local = cloud.bounds();
  Obb box{local.center(), 0.5 * (local.max - local.min), Mat3::Identity()};
  return box.transformed(world);
}

const SceneObject& Scene::object(const std::string& name) const {
  auto it = objects.find(name);
  if (it == objects.end()) raise(ErrorCode::UnknownName, "scene: unknown object '" + name + "'");
  return it->second;
}

SceneObject& Scene::object(const std::string& name) {
  auto it = objects.find(name);
  if (it == objects.end()) raise(ErrorCode::UnknownName, "scene: unknown object '" + name + "'");
  return it->second;
}

void TaskSpec::check() const {
  dsl::Plan plan = dsl::parse_plan(oracle_plan);
  dsl::ValidationReport report = dsl::validate_plan(plan);
  if (!report.ok())
    raise(ErrorCode::InvalidArgument,
          "task " + task_id + ": oracle plan has " + std::to_string(report.violations.size()) +
              " violation(s)");
  Scene scene = reset(*this, 0);
  evaluate_success(scene, success);  // throws UnknownName on a bad reference
}

// --- reset -------------------------------------------------------------------

Scene reset(const TaskSpec& spec, std::uint64_t seed, const SimParams& params) {
  (void)params;
  Scene scene;
  scene.workspace = spec.scene_template.workspace;
  scene.rng_seed = seed;
  scene.gripper.pose = spec.scene_template.gripper_home;
  scene.gripper.open = true;

  std::string seed_key = spec.task_id + "|" + std::to_string(spec.variation) + "|" +
                         std::to_string(seed);
  Rng rng(fnv1a(seed_key));

  std::vector<Obb> placed;
  for (const ObjectTemplate& tmpl : spec.scene_template.objects) {
    SceneObject obj = tmpl.prototype;
    if (scene.objects.count(obj.name))
      raise(ErrorCode::InvalidArgument, "reset: duplicate object name '" + obj.name + "'");
    if (tmpl.sample_position) {
      bool ok = false;
      for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec3 p(rng.uniform(tmpl.sample_region.min.x(), tmpl.sample_region.max.x()),
               rng.uniform(tmpl.sample_region.min.y(), tmpl.sample_region.max.y()),
               rng.uniform(tmpl.sample_region.min.z(), tmpl.sample_region.max.z()));
        obj.pose.position = p;
        Obb box = obj.world_obb();
        bool collides = false;
        for (const Obb& other : placed) {
          if (obb_distance(box, other) < tmpl.min_separation) {
            collides = true;
            break;
          }
        }
        if (!collides) {
          ok = true;
          break;
        }
      }
      if (!ok)
        raise(ErrorCode::PlacementFailure,
              "reset: could not place '" + obj.name + "' after 1000 attempts");
    }
    if (!scene.workspace.aabb.contains(obj.pose.position))
      raise(ErrorCode::InvalidArgument, "reset: object '" + obj.name + "' outside the workspace");
    // Marker regions take part in success predicates only, never in placement.
    if (obj.visible) placed.push_back(obj.world_obb());
    scene.objects.emplace(obj.name, std::move(obj));
  }
  return scene;
}

// --- apply_waypoint ----------------------------------------------------------

namespace {

// Signed joint increment produced by a rigid motion of the grasped part.
double joint_drive_from_motion(const SceneObject& obj, const Vec3& delta_pos,
                               const Quat& delta_rot, const Vec3& grip_point) {
  const Joint& joint = *obj.joint;
  Vec3 axis = obj.joint_axis_world();
  if (joint.kind == JointKind::Prismatic) return delta_pos.dot(axis);
  // Revolute: rotational component about the axis plus the tangential lever
  // component of the translation.
  Eigen::AngleAxisd aa(delta_rot);
  double dval = aa.angle() * aa.axis().dot(axis) * kRadToDeg;
  Vec3 r = grip_point - obj.pose.position;
  Vec3 r_perp = r - r.dot(axis) * axis;
  double lever = r_perp.norm();
  if (lever > 1e-6) {
    Vec3 tangent = axis.cross(r_perp / lever);
    dval += delta_pos.dot(tangent) / lever * kRadToDeg;
  }
  return dval;
}

// Signed joint increment produced by a push sweep that penetrates the part.
double joint_drive_from_push(const SceneObject& obj, const Vec3& overlap, const Vec3& contact) {
  const Joint& joint = *obj.joint;
  Vec3 axis = obj.joint_axis_world();
  if (joint.kind == JointKind::Prismatic) return overlap.dot(axis);
  Vec3 r = contact - obj.pose.position;
  Vec3 r_perp = r - r.dot(axis) * axis;
  double lever = r_perp.norm();
  if (lever < 1e-6) return 0.0;
  Vec3 tangent = axis.cross(r_perp / lever);
  return overlap.dot(tangent) / lever * kRadToDeg;
}

// Top surface height of whatever supports the object at its XY position:
// the table, or the highest visible object top below it.
double support_height(const Scene& scene, const SceneObject& dropped) {
  Obb box = dropped.world_obb();
  double bottom = box.bounding_aabb().min.z();
  double support = scene.workspace.table_height;
  for (const auto& [name, other] : scene.objects) {
    if (name == dropped.name || !other.visible) continue;
    Obb other_box = other.world_obb();
    Vec3 local = other_box.rotation.transpose() * (box.center - other_box.center);
    if (std::abs(local.x()) > other_box.half_extents.x() ||
        std::abs(local.y()) > other_box.half_extents.y())
      continue;
    double top = other_box.bounding_aabb().max.z();
    if (top <= bottom + 1e-6) support = std::max(support, top);
  }
  return support;
}

}  // namespace

void apply_waypoint(Scene& scene, const GripperWaypoint& action, const SimParams& params) {
  if (!scene.workspace.aabb.contains(action.position))
    raise(ErrorCode::OutOfWorkspace, "apply_waypoint: waypoint outside the workspace");

  const Vec3 p0 = scene.gripper.pose.position;
  const Vec3 p1 = action.position;
  const Quat q0 = scene.gripper.pose.rotation;
  const Quat q1 = euler_deg_to_quat(action.rotation_euler_deg);
  const Vec3 delta = p1 - p0;
  const Quat delta_rot = (q1 * q0.conjugate()).normalized();

  // Button states before any joint motion, for transition press logging.
  std::vector<std::pair<std::string, bool>> was_pressed;
  for (const auto& [name, obj] : scene.objects) {
    if (obj.category == "button" && obj.joint && obj.joint->kind == JointKind::Prismatic)
      was_pressed.emplace_back(name, obj.joint->value <= obj.joint->min + 1e-9);
  }

  // Held object follows the gripper.
  if (scene.gripper.held) {
    SceneObject& held = scene.object(*scene.gripper.held);
    if (held.joint && held.anchored) {
      held.joint->value += joint_drive_from_motion(held, delta, delta_rot, p0);
      held.joint->clamp();
    } else {
      Pose new_gripper{q1, p1};
      held.pose = new_gripper.compose(scene.gripper.held_offset);
      if (held.joint && !held.anchored && held.joint->kind == JointKind::Revolute) {
        // Screw progress: rotation about the part's own axis accumulates.
        Eigen::AngleAxisd aa(delta_rot);
        held.joint->value += aa.angle() * aa.axis().dot(held.joint_axis_world()) * kRadToDeg;
        held.joint->clamp();
      }
    }
  }

  // Push sweep against everything not held.
  double seg_len = delta.norm();
  if (seg_len > 1e-9) {
    // Steep descents do not shove free objects (the fingers straddle them);
    // joint drives still apply so buttons can be pressed from above.
    bool horizontal = std::abs(delta.z()) <= 0.5 * seg_len;
    for (auto& [name, obj] : scene.objects) {
      if (scene.gripper.held && name == *scene.gripper.held) continue;
      if (!obj.visible) continue;
      auto entry_t = segment_obb_entry(p0, p1, obj.world_obb());
      // A sweep starting inside the part is the just-released or straddling
      // case, not a push.
      if (!entry_t || *entry_t <= 0.0) continue;
      Vec3 entry = p0 + *entry_t * delta;
      Vec3 overlap = p1 - entry;
      if (obj.joint && obj.anchored) {
        obj.joint->value += joint_drive_from_push(obj, overlap, entry);
        obj.joint->clamp();
      } else if (!obj.anchored && horizontal) {
        obj.pose.position += Vec3(overlap.x(), overlap.y(), 0.0);
      }
    }
  }

  scene.gripper.pose = Pose{q1, p1};

  const bool was_open = scene.gripper.open;
  if (was_open && !action.open) {
    // Closing: attach the nearest graspable object within reach.
    const SceneObject* best = nullptr;
    double best_dist = params.grasp_radius;
    for (const auto& [name, obj] : scene.objects) {
      if (!obj.graspable || !obj.visible) continue;
      double d = (obj.world_obb().center - p1).norm();
      if (d <= best_dist) {
        best_dist = d;
        best = &obj;
      }
    }
    if (best) {
      scene.gripper.held = best->name;
      scene.gripper.held_offset = scene.gripper.pose.inverse().compose(best->pose);
    }
  } else if (!was_open && action.open && scene.gripper.held) {
    // Opening: detach; free objects settle onto their support.
    SceneObject& dropped = scene.object(*scene.gripper.held);
    if (!dropped.anchored) {
      double support = support_height(scene, dropped);
      Obb box = dropped.world_obb();
      double bottom_offset = dropped.pose.position.z() - box.bounding_aabb().min.z();
      dropped.pose.position.z() = support + bottom_offset;
    }
    scene.gripper.held.reset();
  }
  scene.gripper.open = action.open;

  // Log buttons that reached their minimum during this waypoint.
  for (const auto& [name, pressed_before] : was_pressed) {
    const SceneObject& obj = scene.object(name);
    bool pressed_now = obj.joint->value <= obj.joint->min + 1e-9;
    if (pressed_now && !pressed_before) scene.press_log.push_back(name);
  }
}

void record_press(Scene& scene, const std::string& button) {
  const SceneObject& obj = scene.object(button);
  if (!obj.joint || obj.joint->kind != JointKind::Prismatic)
    raise(ErrorCode::InvalidArgument, "record_press: '" + button + "' has no prismatic joint");
  if (obj.joint->value <= obj.joint->min + 1e-9) scene.press_log.push_back(button);
}

// --- success -----------------------------------------------------------------

bool evaluate_success(const Scene& scene, const SuccessCondition& condition,
                      const SimParams& params) {
  return std::visit(
      [&](const auto& cond) -> bool {
        using T = std::decay_t<decltype(cond)>;
        if constexpr (std::is_same_v<T, JointAtLeast>) {
          const SceneObject& obj = scene.object(cond.object);
          if (!obj.joint) raise(ErrorCode::UnknownName, "joint condition on jointless object");
          return obj.joint->value >= obj.joint->min + cond.fraction * obj.joint->range() - 1e-12;
        } else if constexpr (std::is_same_v<T, JointAtMost>) {
          const SceneObject& obj = scene.object(cond.object);
          if (!obj.joint) raise(ErrorCode::UnknownName, "joint condition on jointless object");
          return obj.joint->value <= obj.joint->min + cond.fraction * obj.joint->range() + 1e-12;
        } else if constexpr (std::is_same_v<T, Contains>) {
          const Obb region = scene.object(cond.region).world_obb();
          return region.contains(scene.object(cond.content).world_obb().center);
        } else if constexpr (std::is_same_v<T, OnTopOfArea>) {
          const Obb platform = scene.object(cond.platform).world_obb();
          double top = platform.bounding_aabb().max.z();
          int hits = 0;
          for (const std::string& name : cond.objects) {
            Vec3 c = scene.object(name).world_obb().center;
            Vec3 local = platform.rotation.transpose() * (c - platform.center);
            if (std::abs(local.x()) <= platform.half_extents.x() &&
                std::abs(local.y()) <= platform.half_extents.y() && c.z() >= top - 1e-9)
              ++hits;
          }
          return hits >= cond.count;
        } else if constexpr (std::is_same_v<T, PressedInOrder>) {
          for (const std::string& name : cond.buttons) scene.object(name);
          return scene.press_log == cond.buttons;
        } else if constexpr (std::is_same_v<T, StackedInOrder>) {
          for (std::size_t i = 0; i + 1 < cond.objects.size(); ++i) {
            Vec3 lower = scene.object(cond.objects[i]).world_obb().center;
            Vec3 upper = scene.object(cond.objects[i + 1]).world_obb().center;
            if (upper.z() <= lower.z()) return false;
            if ((upper.head<2>() - lower.head<2>()).norm() > params.stack_radius) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, InContact>) {
          return obb_distance(scene.object(cond.a).world_obb(), scene.object(cond.b).world_obb()) <=
                 params.contact_eps;
        } else {  // AllOf
          for (const SuccessCondition& sub : cond.conditions)
            if (!evaluate_success(scene, sub, params)) return false;
          return true;
        }
      },
      condition.condition);
}

// --- observe -----------------------------------------------------------------

geom::PointCloud sample_obb_surface(const Obb& box, double density,
                                    const std::array<std::uint8_t, 3>& color, double table_height) {
  geom::PointCloud cloud;
  for (int axis = 0; axis < 3; ++axis) {
    int u = (axis + 1) % 3;
    int v = (axis + 2) % 3;
    double hu = box.half_extents[u];
    double hv = box.half_extents[v];
    double area = 4.0 * hu * hv;
    int target = std::max(1, int(std::lround(area * density)));
    int nu = std::max(1, int(std::lround(std::sqrt(double(target) * (hu / std::max(hv, 1e-9))))));
    int nv = std::max(1, int(std::lround(double(target) / nu)));
    for (double side : {-1.0, 1.0}) {
      for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
          Vec3 local = Vec3::Zero();
          local[axis] = side * box.half_extents[axis];
          local[u] = -hu + 2.0 * hu * (i + 0.5) / nu;
          local[v] = -hv + 2.0 * hv * (j + 0.5) / nv;
          geom::Point p;
          p.position = box.center + box.rotation * local;
          p.color = color;
          p.height = p.position.z() - table_height;
          cloud.points.push_back(p);
        }
      }
    }
  }
  return cloud;
}

namespace {

std::array<std::uint8_t, 3> color_for_tag(const std::string& tag) {
  if (tag.empty()) return {128, 128, 128};
  std::uint64_t h = fnv1a(tag);
  return {std::uint8_t(h & 0xff), std::uint8_t((h >> 8) & 0xff), std::uint8_t((h >> 16) & 0xff)};
}

}  // namespace

Observation observe(const Scene& scene, const SimParams& params) {
  Observation obs;
  for (const auto& [name, obj] : scene.objects) {
    if (!obj.visible) continue;
    geom::PointCloud surface;
    if (const auto* cloud = std::get_if<geom::PointCloud>(&obj.geometry)) {
      Pose world = obj.pose.compose(obj.joint_local_transform());
      surface = *cloud;
      for (auto& p : surface.points) {
        p.position = world.apply(p.position);
        p.height = p.position.z() - scene.workspace.table_height;
      }
    } else {
      surface = sample_obb_surface(obj.world_obb(), params.surface_density,
                                   color_for_tag(obj.color), scene.workspace.table_height);
    }

    // Split the surface into per-view detections with fixture embeddings.
    int views = surface.size() >= 2 ? params.views : 1;
    for (int view = 0; view < views; ++view) {
      ground::Detection det;
      det.view_id = "view" + std::to_string(view);
      for (std::size_t i = view; i < surface.size(); i += views)
        det.cloud.points.push_back(surface.points[i]);
      std::uint64_t noise_seed =
          fnv1a(det.view_id + "|" + name, fnv1a(std::to_string(scene.rng_seed)));
      det.embedding = ground::embed_detection(obj.description(), noise_seed, params.embed_noise,
                                              params.embed_dim);
      Aabb bounds = det.cloud.bounds();
      det.bbox = {bounds.min.x() * 1000.0, bounds.min.y() * 1000.0,
                  (bounds.max.x() - bounds.min.x()) * 1000.0,
                  (bounds.max.y() - bounds.min.y()) * 1000.0};
      obs.detections.push_back(std::move(det));
    }

    for (const auto& p : surface.points) {
      obs.cloud.points.push_back(p);
      obs.owners.push_back(name);
    }
  }

  // Gripper body: a small box at the gripper pose, owner kGripperOwner.
  Obb gripper_box{scene.gripper.pose.position, Vec3(0.02, 0.02, 0.03),
                  scene.gripper.pose.rotation.toRotationMatrix()};
  geom::PointCloud gripper_cloud = sample_obb_surface(gripper_box, params.surface_density,
                                                      {40, 40, 40}, scene.workspace.table_height);
  for (const auto& p : gripper_cloud.points) {
    obs.cloud.points.push_back(p);
    obs.owners.push_back(kGripperOwner);
  }
  return obs;
}

}  // namespace manip::sim
