#include <nlohmann/json.hpp>

#include "manip/io.hpp"
#include "manip/sim.hpp"

namespace manip::sim {

namespace {

using nlohmann::ordered_json;

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) raise(ErrorCode::Io, "json: expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ordered_json pose_json(const Pose& pose) {
  return ordered_json{{"position", vec3_json(pose.position)},
                      {"quaternion_wxyz",
                       ordered_json::array({pose.rotation.w(), pose.rotation.x(),
                                            pose.rotation.y(), pose.rotation.z()})}};
}

Pose pose_from(const ordered_json& j) {
  Pose pose;
  pose.position = vec3_from(j.at("position"));
  const auto& q = j.at("quaternion_wxyz");
  pose.rotation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                       q[3].get<double>())
                      .normalized();
  return pose;
}

ordered_json geometry_json(const Geometry& geometry) {
  if (const auto* box = std::get_if<Obb>(&geometry)) {
    Quat q(box->rotation);
    return ordered_json{{"type", "box"},
                        {"center", vec3_json(box->center)},
                        {"half_extents", vec3_json(box->half_extents)},
                        {"quaternion_wxyz", ordered_json::array({q.w(), q.x(), q.y(), q.z()})}};
  }
  // Cloud geometry travels as binary PLY, base64 wrapped to stay in one file.
  const auto& cloud = std::get<geom::PointCloud>(geometry);
  return ordered_json{{"type", "cloud"},
                      {"ply_base64", io::base64_encode(io::ply_to_string(cloud))}};
}

Geometry geometry_from(const ordered_json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "box") {
    Obb box;
    box.center = vec3_from(j.at("center"));
    box.half_extents = vec3_from(j.at("half_extents"));
    const auto& q = j.at("quaternion_wxyz");
    box.rotation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                        q[3].get<double>())
                       .normalized()
                       .toRotationMatrix();
    return box;
  }
  if (type == "cloud")
    return io::ply_from_string(io::base64_decode(j.at("ply_base64").get<std::string>()));
  raise(ErrorCode::Io, "json: unknown geometry type '" + type + "'");
}

ordered_json joint_json(const Joint& joint) {
  return ordered_json{{"kind", joint.kind == JointKind::Revolute ? "revolute" : "prismatic"},
                      {"axis", vec3_json(joint.axis)},
                      {"limits", ordered_json::array({joint.min, joint.max})},
                      {"value", joint.value}};
}

Joint joint_from(const ordered_json& j) {
  Joint joint;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "revolute") joint.kind = JointKind::Revolute;
  else if (kind == "prismatic") joint.kind = JointKind::Prismatic;
  else raise(ErrorCode::Io, "json: unknown joint kind '" + kind + "'");
  joint.axis = vec3_from(j.at("axis")).normalized();
  joint.min = j.at("limits")[0].get<double>();
  joint.max = j.at("limits")[1].get<double>();
  joint.value = j.at("value").get<double>();
  if (joint.min > joint.max) raise(ErrorCode::Io, "json: joint limits inverted");
  joint.clamp();
  return joint;
}

ordered_json object_json(const SceneObject& obj) {
  ordered_json j{{"name", obj.name},
                 {"category", obj.category},
                 {"color", obj.color},
                 {"geometry", geometry_json(obj.geometry)},
                 {"pose", pose_json(obj.pose)},
                 {"graspable", obj.graspable},
                 {"anchored", obj.anchored},
                 {"visible", obj.visible}};
  if (obj.joint) j["joint"] = joint_json(*obj.joint);
  return j;
}

SceneObject object_from(const ordered_json& j) {
  SceneObject obj;
  obj.name = j.at("name").get<std::string>();
  obj.category = j.at("category").get<std::string>();
  obj.color = j.value("color", std::string());
  obj.geometry = geometry_from(j.at("geometry"));
  obj.pose = pose_from(j.at("pose"));
  obj.graspable = j.value("graspable", false);
  obj.anchored = j.value("anchored", false);
  obj.visible = j.value("visible", true);
  if (j.contains("joint")) obj.joint = joint_from(j.at("joint"));
  return obj;
}

ordered_json workspace_json(const geom::Workspace& ws) {
  return ordered_json{{"aabb_min", vec3_json(ws.aabb.min)},
                      {"aabb_max", vec3_json(ws.aabb.max)},
                      {"table_height", ws.table_height}};
}

geom::Workspace workspace_from(const ordered_json& j) {
  geom::Workspace ws;
  ws.aabb.min = vec3_from(j.at("aabb_min"));
  ws.aabb.max = vec3_from(j.at("aabb_max"));
  ws.table_height = j.at("table_height").get<double>();
  if (!ws.aabb.valid()) raise(ErrorCode::Io, "json: workspace box is inverted");
  return ws;
}

ordered_json condition_json(const SuccessCondition& condition) {
  return std::visit(
      [](const auto& cond) -> ordered_json {
        using T = std::decay_t<decltype(cond)>;
        if constexpr (std::is_same_v<T, JointAtLeast>)
          return {{"type", "joint_at_least"}, {"object", cond.object}, {"fraction", cond.fraction}};
        else if constexpr (std::is_same_v<T, JointAtMost>)
          return {{"type", "joint_at_most"}, {"object", cond.object}, {"fraction", cond.fraction}};
        else if constexpr (std::is_same_v<T, Contains>)
          return {{"type", "contains"}, {"region", cond.region}, {"content", cond.content}};
        else if constexpr (std::is_same_v<T, OnTopOfArea>)
          return {{"type", "on_top_of_area"},
                  {"platform", cond.platform},
                  {"objects", cond.objects},
                  {"count", cond.count}};
        else if constexpr (std::is_same_v<T, PressedInOrder>)
          return {{"type", "pressed_in_order"}, {"buttons", cond.buttons}};
        else if constexpr (std::is_same_v<T, StackedInOrder>)
          return {{"type", "stacked_in_order"}, {"objects", cond.objects}};
        else if constexpr (std::is_same_v<T, InContact>)
          return {{"type", "in_contact"}, {"a", cond.a}, {"b", cond.b}};
        else {
          ordered_json subs = ordered_json::array();
          for (const SuccessCondition& sub : cond.conditions) subs.push_back(condition_json(sub));
          return {{"type", "all_of"}, {"conditions", subs}};
        }
      },
      condition.condition);
}

SuccessCondition condition_from(const ordered_json& j) {
  std::string type = j.at("type").get<std::string>();
  SuccessCondition out;
  if (type == "joint_at_least")
    out.condition = JointAtLeast{j.at("object").get<std::string>(), j.at("fraction").get<double>()};
  else if (type == "joint_at_most")
    out.condition = JointAtMost{j.at("object").get<std::string>(), j.at("fraction").get<double>()};
  else if (type == "contains")
    out.condition = Contains{j.at("region").get<std::string>(), j.at("content").get<std::string>()};
  else if (type == "on_top_of_area")
    out.condition = OnTopOfArea{j.at("platform").get<std::string>(),
                                j.at("objects").get<std::vector<std::string>>(),
                                j.at("count").get<int>()};
  else if (type == "pressed_in_order")
    out.condition = PressedInOrder{j.at("buttons").get<std::vector<std::string>>()};
  else if (type == "stacked_in_order")
    out.condition = StackedInOrder{j.at("objects").get<std::vector<std::string>>()};
  else if (type == "in_contact")
    out.condition = InContact{j.at("a").get<std::string>(), j.at("b").get<std::string>()};
  else if (type == "all_of") {
    AllOf all;
    for (const auto& sub : j.at("conditions")) all.conditions.push_back(condition_from(sub));
    out.condition = std::move(all);
  } else {
    raise(ErrorCode::Io, "json: unknown success condition '" + type + "'");
  }
  return out;
}

}  // namespace

std::string scene_to_json(const Scene& scene) {
  ordered_json j;
  ordered_json objects = ordered_json::array();
  for (const auto& [name, obj] : scene.objects) objects.push_back(object_json(obj));
  j["objects"] = objects;
  ordered_json gripper{{"pose", pose_json(scene.gripper.pose)}, {"open", scene.gripper.open}};
  if (scene.gripper.held) {
    gripper["held"] = *scene.gripper.held;
    gripper["held_offset"] = pose_json(scene.gripper.held_offset);
  }
  j["gripper"] = gripper;
  j["workspace"] = workspace_json(scene.workspace);
  j["rng_seed"] = scene.rng_seed;
  j["press_log"] = scene.press_log;
  return j.dump(2) + "\n";
}

Scene scene_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  Scene scene;
  for (const auto& oj : j.at("objects")) {
    SceneObject obj = object_from(oj);
    scene.objects.emplace(obj.name, std::move(obj));
  }
  const auto& g = j.at("gripper");
  scene.gripper.pose = pose_from(g.at("pose"));
  scene.gripper.open = g.at("open").get<bool>();
  if (g.contains("held")) {
    scene.gripper.held = g.at("held").get<std::string>();
    scene.gripper.held_offset = pose_from(g.at("held_offset"));
  }
  scene.workspace = workspace_from(j.at("workspace"));
  scene.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  scene.press_log = j.at("press_log").get<std::vector<std::string>>();
  return scene;
}

std::string task_to_json(const TaskSpec& spec) {
  ordered_json j;
  j["task_id"] = spec.task_id;
  j["variation"] = spec.variation;
  j["instruction"] = spec.instruction;
  j["level"] = spec.level;
  ordered_json tmpl;
  tmpl["workspace"] = workspace_json(spec.scene_template.workspace);
  tmpl["gripper_home"] = pose_json(spec.scene_template.gripper_home);
  ordered_json objects = ordered_json::array();
  for (const ObjectTemplate& obj : spec.scene_template.objects) {
    ordered_json oj;
    oj["object"] = object_json(obj.prototype);
    oj["sample_position"] = obj.sample_position;
    if (obj.sample_position) {
      oj["sample_region_min"] = vec3_json(obj.sample_region.min);
      oj["sample_region_max"] = vec3_json(obj.sample_region.max);
      oj["min_separation"] = obj.min_separation;
    }
    objects.push_back(oj);
  }
  tmpl["objects"] = objects;
  j["scene_template"] = tmpl;
  j["success"] = condition_json(spec.success);
  return j.dump(2) + "\n";
}

TaskSpec task_from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  TaskSpec spec;
  spec.task_id = j.at("task_id").get<std::string>();
  spec.variation = j.at("variation").get<int>();
  spec.instruction = j.at("instruction").get<std::string>();
  spec.level = j.at("level").get<int>();
  const auto& tmpl = j.at("scene_template");
  spec.scene_template.workspace = workspace_from(tmpl.at("workspace"));
  spec.scene_template.gripper_home = pose_from(tmpl.at("gripper_home"));
  for (const auto& oj : tmpl.at("objects")) {
    ObjectTemplate obj;
    obj.prototype = object_from(oj.at("object"));
    obj.sample_position = oj.value("sample_position", false);
    if (obj.sample_position) {
      obj.sample_region.min = vec3_from(oj.at("sample_region_min"));
      obj.sample_region.max = vec3_from(oj.at("sample_region_max"));
      obj.min_separation = oj.value("min_separation", 0.06);
    }
    spec.scene_template.objects.push_back(std::move(obj));
  }
  spec.success = condition_from(j.at("success"));
  return spec;
}

}  // namespace manip::sim
