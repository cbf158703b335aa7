#include <doctest.h>

#include "helpers.hpp"
#include "manip/sim.hpp"
#include "manip/tasks.hpp"

using namespace manip;
using namespace manip::sim;

namespace {

const TaskSpec& find_task(const std::vector<TaskSpec>& tasks, const std::string& id,
                          int variation = 0) {
  for (const auto& t : tasks)
    if (t.task_id == id && t.variation == variation) return t;
  REQUIRE(false);
  return tasks.front();
}

}  // namespace

TEST_CASE("reset is deterministic per seed and varies across seeds") {
  auto tasks = tasks::builtin_catalog();
  const TaskSpec& pick = find_task(tasks, "pick_and_lift");

  Scene a = reset(pick, 7);
  Scene b = reset(pick, 7);
  CHECK(scene_to_json(a) == scene_to_json(b));

  Scene c = reset(pick, 8);
  CHECK(scene_to_json(a) != scene_to_json(c));

  // Scene JSON roundtrip.
  Scene back = scene_from_json(scene_to_json(a));
  CHECK(scene_to_json(back) == scene_to_json(a));
}

TEST_CASE("over-full template fails placement") {
  TaskSpec spec;
  spec.task_id = "crowded";
  spec.instruction = "impossible";
  spec.scene_template.workspace.aabb = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  spec.scene_template.gripper_home = Pose::translation(Vec3(0, 0, 0.5));
  for (int i = 0; i < 9; ++i) {
    SceneObject obj;
    obj.name = "cube" + std::to_string(i);
    obj.category = "cube";
    obj.geometry = Obb{Vec3(0, 0, 0.02), Vec3(0.02, 0.02, 0.02), Mat3::Identity()};
    ObjectTemplate tmpl;
    tmpl.prototype = obj;
    tmpl.sample_position = true;
    tmpl.sample_region = Aabb{Vec3(0, 0, 0), Vec3(0.08, 0.08, 0)};  // far too small for nine
    tmpl.min_separation = 0.06;
    spec.scene_template.objects.push_back(tmpl);
  }
  spec.success = SuccessCondition{InContact{"cube0", "cube1"}};
  CHECK_THROWS_AS(reset(spec, 0), Error);
}

TEST_CASE("waypoints must stay inside the workspace") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "pick_and_lift"), 0);
  CHECK_THROWS_AS(apply_waypoint(scene, GripperWaypoint{Vec3(9, 9, 9), Vec3::Zero(), true}), Error);
}

TEST_CASE("closing with nothing nearby holds nothing") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "pick_and_lift"), 0);
  apply_waypoint(scene, GripperWaypoint{Vec3(0.25, 0, 0.4), Vec3::Zero(), false});
  CHECK(!scene.gripper.open);
  CHECK(!scene.gripper.held.has_value());
}

TEST_CASE("grasp, carry, and drop a cube") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "pick_and_lift"), 3);
  Vec3 cube_center = scene.object("cube_red").world_obb().center;

  apply_waypoint(scene, GripperWaypoint{cube_center + Vec3(0, 0, 0.08), Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{cube_center, Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{cube_center, Vec3::Zero(), false});
  REQUIRE(scene.gripper.held == "cube_red");
  CHECK(!scene.gripper.open);

  // Held rigidity: the relative pose stays fixed while carrying.
  Pose before = scene.gripper.pose.inverse().compose(scene.object("cube_red").pose);
  Vec3 drop_point(0.45, 0.1, 0.2);
  apply_waypoint(scene, GripperWaypoint{cube_center + Vec3(0, 0, 0.15), Vec3::Zero(), false});
  apply_waypoint(scene, GripperWaypoint{drop_point, Vec3::Zero(), false});
  Pose after = scene.gripper.pose.inverse().compose(scene.object("cube_red").pose);
  CHECK((before.position - after.position).norm() < 1e-12);
  CHECK(std::abs(std::abs(before.rotation.dot(after.rotation)) - 1) < 1e-12);

  // Opening snaps the cube down onto the table (drop spot clear of samples).
  apply_waypoint(scene, GripperWaypoint{Vec3(0.45, 0.38, 0.2), Vec3::Zero(), false});
  drop_point = Vec3(0.45, 0.38, 0.2);
  apply_waypoint(scene, GripperWaypoint{drop_point, Vec3::Zero(), true});
  CHECK(!scene.gripper.held.has_value());
  Obb dropped = scene.object("cube_red").world_obb();
  CHECK(dropped.bounding_aabb().min.z() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(dropped.center.x() == doctest::Approx(drop_point.x()));
}

TEST_CASE("grasped drawer front projects motion onto its prismatic axis") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "open_drawer"), 0);
  const SceneObject& front = scene.object("drawer_bottom");
  Vec3 handle = front.world_obb().center;

  apply_waypoint(scene, GripperWaypoint{handle + Vec3(0, 0, 0.08), Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{handle, Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{handle, Vec3::Zero(), false});
  REQUIRE(scene.gripper.held == "drawer_bottom");

  // Pull 0.2 m outward along -X against a 0.12 m range: clamped at max.
  Vec3 out = handle - Vec3(0.2, 0, 0);
  apply_waypoint(scene, GripperWaypoint{out, Vec3::Zero(), false});
  CHECK(scene.object("drawer_bottom").joint->value == doctest::Approx(0.12));
  // Projection oracle: delta dot axis, clamped.
  CHECK(evaluate_success(scene, find_task(tasks, "open_drawer").success));

  // The anchored front never translates its pose.
  CHECK(scene.object("drawer_bottom").pose.position.x() == doctest::Approx(0.55));
  // Diagonal pulls only credit the axis component.
  Scene scene2 = reset(find_task(tasks, "open_drawer"), 1);
  Vec3 handle2 = scene2.object("drawer_bottom").world_obb().center;
  apply_waypoint(scene2, GripperWaypoint{handle2 + Vec3(0, 0, 0.08), Vec3::Zero(), true});
  apply_waypoint(scene2, GripperWaypoint{handle2, Vec3::Zero(), true});
  apply_waypoint(scene2, GripperWaypoint{handle2, Vec3::Zero(), false});
  apply_waypoint(scene2, GripperWaypoint{handle2 + Vec3(-0.05, 0.1, 0.0), Vec3::Zero(), false});
  CHECK(scene2.object("drawer_bottom").joint->value == doctest::Approx(0.05));
}

TEST_CASE("further opening motion never un-satisfies joint_at_least") {
  auto tasks = tasks::builtin_catalog();
  const TaskSpec& spec = find_task(tasks, "open_drawer", 0);
  Scene scene = reset(spec, 11);
  Vec3 handle = scene.object("drawer_bottom").world_obb().center;
  apply_waypoint(scene, GripperWaypoint{handle, Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{handle, Vec3::Zero(), false});
  REQUIRE(scene.gripper.held == "drawer_bottom");
  apply_waypoint(scene, GripperWaypoint{handle - Vec3(0.15, 0, 0), Vec3::Zero(), false});
  REQUIRE(evaluate_success(scene, spec.success));
  // Keep pulling along the opening direction: success must stay true.
  for (int i = 1; i <= 4; ++i) {
    apply_waypoint(scene, GripperWaypoint{handle - Vec3(0.15 + 0.02 * i, 0, 0), Vec3::Zero(),
                                          false});
    CHECK(evaluate_success(scene, spec.success));
  }
}

TEST_CASE("cloud geometry roundtrips through scene json as ply") {
  Scene scene;
  scene.workspace.aabb = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  SceneObject rock;
  rock.name = "rock";
  rock.category = "rock";
  geom::PointCloud shape;
  Rng rng(107);
  for (int i = 0; i < 20; ++i) {
    geom::Point p;
    p.position = Vec3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(0, 0.04));
    shape.points.push_back(p);
  }
  rock.geometry = shape;
  rock.pose = Pose::translation(Vec3(0.2, 0.1, 0));
  scene.objects.emplace("rock", rock);

  Scene back = scene_from_json(scene_to_json(scene));
  const auto& loaded = std::get<geom::PointCloud>(back.object("rock").geometry);
  REQUIRE(loaded.size() == 20);
  for (std::size_t i = 0; i < 20; ++i)
    for (int k = 0; k < 3; ++k)
      CHECK(loaded.points[i].position[k] == double(float(shape.points[i].position[k])));
  CHECK(scene_to_json(back) == scene_to_json(scene_from_json(scene_to_json(back))));
}

TEST_CASE("joint values never leave their limits under random action sequences") {
  auto tasks = tasks::builtin_catalog();
  Rng rng(103);
  for (int episode = 0; episode < 5; ++episode) {
    Scene scene = reset(find_task(tasks, "open_drawer"), std::uint64_t(episode));
    for (int step = 0; step < 30; ++step) {
      Vec3 target(rng.uniform(0.0, 0.8), rng.uniform(-0.4, 0.4), rng.uniform(0.0, 0.6));
      apply_waypoint(scene, GripperWaypoint{target, Vec3(0, 0, rng.uniform(0, 360)),
                                            rng.uniform() < 0.5});
      for (const auto& [name, obj] : scene.objects) {
        if (!obj.joint) continue;
        CHECK(obj.joint->value >= obj.joint->min - 1e-12);
        CHECK(obj.joint->value <= obj.joint->max + 1e-12);
      }
    }
  }
}

TEST_CASE("unheld free objects move only by push or snap") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "slide_block"), 2);
  Vec3 before = scene.object("cube_red").world_obb().center;

  // High transit above everything: nothing moves.
  apply_waypoint(scene, GripperWaypoint{Vec3(0.6, 0.3, 0.4), Vec3::Zero(), true});
  CHECK((scene.object("cube_red").world_obb().center - before).norm() == 0.0);

  // A horizontal sweep through the cube pushes it along the motion.
  Vec3 behind = before - Vec3(0.12, 0, 0);
  behind.z() = before.z();
  apply_waypoint(scene, GripperWaypoint{behind, Vec3::Zero(), true});
  apply_waypoint(scene, GripperWaypoint{before + Vec3(0.1, 0, 0), Vec3::Zero(), true});
  Vec3 after = scene.object("cube_red").world_obb().center;
  CHECK(after.x() > before.x() + 0.05);
  CHECK(after.y() == doctest::Approx(before.y()));
  CHECK(after.z() == doctest::Approx(before.z()));
}

TEST_CASE("success predicates") {
  auto tasks = tasks::builtin_catalog();

  SUBCASE("joint at least: drawer fully extended") {
    Scene scene = reset(find_task(tasks, "open_drawer"), 0);
    scene.object("drawer_bottom").joint->value = 0.12;
    CHECK(evaluate_success(scene, SuccessCondition{JointAtLeast{"drawer_bottom", 1.0}}));
    scene.object("drawer_bottom").joint->value = 0.119;
    CHECK(!evaluate_success(scene, SuccessCondition{JointAtLeast{"drawer_bottom", 1.0}}));
    CHECK(evaluate_success(scene, SuccessCondition{JointAtLeast{"drawer_bottom", 0.9}}));
  }

  SUBCASE("stacked blocks dead-center") {
    Scene scene = reset(find_task(tasks, "stack_blocks"), 0);
    scene.object("cube_purple_1").pose.position = Vec3(0.5, 0.0, 0.0);
    scene.object("cube_purple_2").pose.position = Vec3(0.5, 0.0, 0.04);
    CHECK(evaluate_success(scene,
                           SuccessCondition{StackedInOrder{{"cube_purple_1", "cube_purple_2"}}}));
    scene.object("cube_purple_2").pose.position = Vec3(0.56, 0.0, 0.04);
    CHECK(!evaluate_success(scene,
                            SuccessCondition{StackedInOrder{{"cube_purple_1", "cube_purple_2"}}}));
  }

  SUBCASE("fridge door closed and touching the cabinet") {
    Scene scene = reset(find_task(tasks, "close_fridge"), 0);
    CHECK(!evaluate_success(scene, find_task(tasks, "close_fridge").success));
    scene.object("fridge_door").joint->value = 0.0;
    CHECK(evaluate_success(scene, SuccessCondition{InContact{"fridge_door", "fridge_body"}}));
    CHECK(evaluate_success(scene, find_task(tasks, "close_fridge").success));
  }

  SUBCASE("contains and on-top-of-area") {
    Scene scene = reset(find_task(tasks, "stack_blocks"), 1);
    Vec3 platform = scene.object("platform_green").world_obb().center;
    scene.object("cube_purple_1").pose.position = Vec3(platform.x(), platform.y(), 0.01);
    scene.object("cube_purple_2").pose.position = Vec3(platform.x(), platform.y(), 0.05);
    CHECK(evaluate_success(
        scene,
        SuccessCondition{OnTopOfArea{"platform_green", {"cube_purple_1", "cube_purple_2"}, 2}}));
    CHECK(!evaluate_success(
        scene, SuccessCondition{OnTopOfArea{"platform_green", {"cube_teal_1"}, 1}}));
  }

  SUBCASE("unknown names raise") {
    Scene scene = reset(find_task(tasks, "stack_blocks"), 0);
    CHECK_THROWS_AS(evaluate_success(scene, SuccessCondition{JointAtLeast{"ghost", 1.0}}), Error);
  }
}

TEST_CASE("press log records ordered transitions") {
  auto tasks = tasks::builtin_catalog();
  Scene scene = reset(find_task(tasks, "push_buttons_seq"), 0);

  SUBCASE("record_press appends only when the joint sits at its minimum") {
    record_press(scene, "button_navy");
    CHECK(scene.press_log.empty());  // unpressed: unchanged
    scene.object("button_navy").joint->value = 0.0;
    record_press(scene, "button_navy");
    scene.object("button_teal").joint->value = 0.0;
    record_press(scene, "button_teal");
    CHECK(scene.press_log == std::vector<std::string>{"button_navy", "button_teal"});
    CHECK_THROWS_AS(record_press(scene, "ghost"), Error);
  }

  SUBCASE("pressing via waypoints logs automatically, once per press") {
    auto press = [&](const std::string& name) {
      Vec3 top = scene.object(name).world_obb().center;
      top.z() = scene.object(name).world_obb().bounding_aabb().max.z();
      apply_waypoint(scene, GripperWaypoint{top + Vec3(0, 0, 0.05), Vec3::Zero(), true});
      apply_waypoint(scene, GripperWaypoint{top - Vec3(0, 0, 0.03), Vec3::Zero(), true});
    };
    press("button_navy");
    press("button_teal");
    CHECK(scene.press_log == std::vector<std::string>{"button_navy", "button_teal"});
    CHECK(evaluate_success(scene, find_task(tasks, "push_buttons_seq").success));
  }

  SUBCASE("wrong order fails the ordered condition") {
    scene.object("button_teal").joint->value = 0.0;
    record_press(scene, "button_teal");
    scene.object("button_navy").joint->value = 0.0;
    record_press(scene, "button_navy");
    CHECK(!evaluate_success(scene, find_task(tasks, "push_buttons_seq").success));
  }
}

TEST_CASE("observation sampling") {
  auto tasks = tasks::builtin_catalog();

  SUBCASE("surface density on a 0.1 m cube is about 600 points") {
    Obb cube{Vec3(0.3, 0, 0.05), Vec3(0.05, 0.05, 0.05), Mat3::Identity()};
    geom::PointCloud cloud = sample_obb_surface(cube, 1e4, {10, 20, 30}, 0.0);
    CHECK(cloud.size() >= 550);
    CHECK(cloud.size() <= 650);
    for (const auto& p : cloud.points) {
      Vec3 local = (p.position - cube.center).cwiseAbs();
      CHECK((local - cube.half_extents).cwiseAbs().minCoeff() < 1e-9);  // on a face
      CHECK(p.height == doctest::Approx(p.position.z()));
    }
  }

  SUBCASE("owners partition the cloud and detections come per view") {
    Scene scene = reset(find_task(tasks, "pick_and_lift"), 0);
    SimParams params;
    Observation obs = observe(scene, params);
    REQUIRE(obs.owners.size() == obs.cloud.size());
    // 4 visible objects x 2 views.
    CHECK(obs.detections.size() == 8);
    std::set<std::string> owners(obs.owners.begin(), obs.owners.end());
    CHECK(owners.count("cube_red") == 1);
    CHECK(owners.count(kGripperOwner) == 1);
    CHECK(owners.count("lift_zone") == 0);  // invisible markers are not observed

    std::size_t detection_points = 0;
    for (const auto& det : obs.detections) {
      CHECK(std::abs(det.embedding.norm() - 1.0) < 1e-9);
      detection_points += det.cloud.size();
    }
    std::size_t object_points = 0;
    for (const auto& owner : obs.owners)
      if (owner != kGripperOwner) ++object_points;
    CHECK(detection_points == object_points);
  }
}

TEST_CASE("task catalog specs all validate") {
  auto tasks = tasks::builtin_catalog();
  CHECK(tasks.size() >= 8);
  std::set<int> levels;
  for (const auto& spec : tasks) {
    CAPTURE(spec.task_id);
    spec.check();
    levels.insert(spec.level);
  }
  CHECK(levels.count(1) == 1);
  CHECK(levels.count(4) == 1);

  // Task JSON roundtrip.
  for (const auto& spec : tasks) {
    TaskSpec back = sim::task_from_json(sim::task_to_json(spec));
    back.oracle_plan = spec.oracle_plan;
    CHECK(sim::task_to_json(back) == sim::task_to_json(spec));
  }
}

TEST_CASE("catalog export and reload") {
  auto dir = std::filesystem::temp_directory_path() / "manip_catalog_test";
  std::filesystem::remove_all(dir);
  auto tasks_list = tasks::builtin_catalog();
  tasks::export_catalog(tasks_list, dir);
  auto loaded = tasks::load_catalog(dir);
  REQUIRE(loaded.size() == tasks_list.size());
  auto by_key = [](const sim::TaskSpec& a, const sim::TaskSpec& b) {
    return std::tie(a.task_id, a.variation) < std::tie(b.task_id, b.variation);
  };
  std::sort(loaded.begin(), loaded.end(), by_key);
  std::sort(tasks_list.begin(), tasks_list.end(), by_key);
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].task_id == tasks_list[i].task_id);
    CHECK(loaded[i].variation == tasks_list[i].variation);
    CHECK(loaded[i].oracle_plan == tasks_list[i].oracle_plan);
    CHECK(sim::task_to_json(loaded[i]) == sim::task_to_json(tasks_list[i]));
  }
}
