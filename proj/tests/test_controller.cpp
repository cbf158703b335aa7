#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "manip/controller.hpp"
#include "manip/eval.hpp"
#include "manip/io.hpp"
#include "manip/sim.hpp"
#include "manip/tasks.hpp"

using namespace manip;
using namespace manip::ctrl;

namespace {

const sim::TaskSpec& find_task(const std::vector<sim::TaskSpec>& tasks, const std::string& id,
                               int variation = 0) {
  for (const auto& t : tasks)
    if (t.task_id == id && t.variation == variation) return t;
  REQUIRE(false);
  return tasks.front();
}

ControllerParams desk_params(const sim::Scene& scene) {
  ControllerParams params;
  params.workspace = scene.workspace;
  return params;
}

geom::PointCloud labeled_cube(const Vec3& center, geom::PointLabel label, int count = 8) {
  geom::PointCloud cloud;
  Rng rng(7);
  for (int i = 0; i < count; ++i) {
    geom::Point p;
    p.position = center + Vec3(rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02),
                               rng.uniform(-0.02, 0.02));
    p.label = label;
    cloud.points.push_back(p);
  }
  return cloud;
}

void run_trajectory(sim::Scene& scene, const ControlResult& result) {
  for (const auto& action : result.trajectory)
    sim::apply_waypoint(scene,
                        sim::GripperWaypoint{action.position, action.rotation_euler_deg,
                                             action.open});
}

}  // namespace

TEST_CASE("release opens in place") {
  ControlRequest req;
  req.primitive = dsl::Primitive::Release;
  req.gripper_pose = Pose::translation(Vec3(0.3, 0.1, 0.2));
  req.gripper_open = false;
  ControllerParams params;
  params.workspace.aabb = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  ControlResult result = plan_motion(req, params);
  REQUIRE(result.trajectory.size() == 1);
  CHECK(result.trajectory[0].open);
  CHECK((result.trajectory[0].position - Vec3(0.3, 0.1, 0.2)).norm() < 1e-12);
  CHECK(result.stop_at == 0);
}

TEST_CASE("every primitive emits a bounded trajectory with one stop") {
  auto tasks = tasks::builtin_catalog();
  sim::Scene scene = sim::reset(find_task(tasks, "pick_and_lift"), 0);
  ControllerParams params = desk_params(scene);

  for (auto primitive : {dsl::Primitive::Grasp, dsl::Primitive::MoveGraspedObject,
                         dsl::Primitive::RotateGraspedObject, dsl::Primitive::PushDown,
                         dsl::Primitive::PushForward, dsl::Primitive::Release}) {
    ControlRequest req;
    req.primitive = primitive;
    req.gripper_pose = scene.gripper.pose;
    req.object_cloud = labeled_cube(Vec3(0.3, 0, 0.02), geom::PointLabel::GoalObject);
    req.target_cloud = labeled_cube(Vec3(0.5, 0.1, 0.01), geom::PointLabel::GoalTarget);
    ControlResult result = plan_motion(req, params);
    CHECK(result.trajectory.size() >= 1);
    CHECK(result.trajectory.size() <= std::size_t(params.max_trajectory_len));
    CHECK(result.stop_at == int(result.trajectory.size()) - 1);
    for (const auto& action : result.trajectory)
      CHECK(params.workspace.aabb.contains(action.position));
  }
}

TEST_CASE("missing clouds raise typed errors") {
  ControllerParams params;
  params.workspace.aabb = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  ControlRequest req;
  req.primitive = dsl::Primitive::Grasp;
  CHECK_THROWS_AS(plan_motion(req, params), Error);
  req.primitive = dsl::Primitive::MoveGraspedObject;
  CHECK_THROWS_AS(plan_motion(req, params), Error);
}

TEST_CASE("grasping a cube through the simulator attaches it") {
  auto tasks = tasks::builtin_catalog();
  sim::Scene scene = sim::reset(find_task(tasks, "pick_and_lift"), 5);
  ControllerParams params = desk_params(scene);

  sim::Observation obs = sim::observe(scene);
  geom::PointCloud object_cloud;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i)
    if (obs.owners[i] == "cube_red") object_cloud.points.push_back(obs.cloud.points[i]);

  ControlRequest req;
  req.primitive = dsl::Primitive::Grasp;
  req.object_cloud = object_cloud;
  req.gripper_pose = scene.gripper.pose;
  req.gripper_open = true;
  ControlResult result = plan_motion(req, params);
  REQUIRE(result.trajectory.size() == 3);
  CHECK(result.trajectory[0].open);
  CHECK(result.trajectory[1].open);
  CHECK(!result.trajectory[2].open);
  CHECK((result.trajectory[2].position - object_cloud.centroid()).norm() < 1e-9);

  run_trajectory(scene, result);
  CHECK(scene.gripper.held == "cube_red");
}

TEST_CASE("push down drives a button to its stop") {
  auto tasks = tasks::builtin_catalog();
  const sim::TaskSpec& spec = find_task(tasks, "press_button");
  sim::Scene scene = sim::reset(spec, 2);
  ControllerParams params = desk_params(scene);

  sim::Observation obs = sim::observe(scene);
  geom::PointCloud button_cloud;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i)
    if (obs.owners[i] == "button_maroon") button_cloud.points.push_back(obs.cloud.points[i]);

  ControlRequest req;
  req.primitive = dsl::Primitive::PushDown;
  req.object_cloud = button_cloud;
  req.gripper_pose = scene.gripper.pose;
  ControlResult result = plan_motion(req, params);
  REQUIRE(result.trajectory.size() == 2);
  run_trajectory(scene, result);
  CHECK(scene.object("button_maroon").joint->value == doctest::Approx(0.0));
  CHECK(scene.press_log == std::vector<std::string>{"button_maroon"});
  CHECK(sim::evaluate_success(scene, spec.success));
}

TEST_CASE("label_points labels by membership with obstacle fallback") {
  auto tasks = tasks::builtin_catalog();
  sim::Scene scene = sim::reset(find_task(tasks, "pick_and_lift"), 1);
  sim::Observation obs = sim::observe(scene);

  geom::PointCloud robot;
  geom::PointCloud object;
  std::size_t object_count = 0, robot_count = 0;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i) {
    if (obs.owners[i] == sim::kGripperOwner) {
      robot.points.push_back(obs.cloud.points[i]);
      ++robot_count;
    } else if (obs.owners[i] == "cube_red") {
      object.points.push_back(obs.cloud.points[i]);
      ++object_count;
    }
  }

  SUBCASE("no object or target: everything non-gripper is obstacle") {
    geom::PointCloud labeled = label_points(obs.cloud, nullptr, nullptr, &robot);
    std::size_t obstacles = 0, robots = 0;
    for (const auto& p : labeled.points) {
      REQUIRE(p.label.has_value());
      if (*p.label == geom::PointLabel::Obstacle) ++obstacles;
      if (*p.label == geom::PointLabel::Robot) ++robots;
    }
    CHECK(robots == robot_count);
    CHECK(obstacles == labeled.size() - robot_count);
  }

  SUBCASE("object instance points get the goal label, counts match membership") {
    geom::PointCloud labeled = label_points(obs.cloud, &object, nullptr, &robot);
    std::size_t goals = 0;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (*labeled.points[i].label == geom::PointLabel::GoalObject) {
        ++goals;
        CHECK(obs.owners[i] == "cube_red");
      }
    }
    CHECK(goals == object_count);
  }
}

TEST_CASE("plan_motion ignores point colors entirely") {
  auto tasks = tasks::builtin_catalog();
  sim::Scene scene = sim::reset(find_task(tasks, "pick_and_lift"), 4);
  ControllerParams params = desk_params(scene);

  ControlRequest req;
  req.primitive = dsl::Primitive::MoveGraspedObject;
  req.object_cloud = labeled_cube(Vec3(0.3, 0.1, 0.05), geom::PointLabel::GoalObject);
  req.target_cloud = labeled_cube(Vec3(0.5, -0.1, 0.01), geom::PointLabel::GoalTarget);
  req.gripper_pose = Pose::translation(Vec3(0.3, 0.1, 0.06));
  req.gripper_open = false;

  ControlResult base = plan_motion(req, params);

  ControlRequest recolored = req;
  Rng rng(11);
  auto scramble = [&](std::optional<geom::PointCloud>& cloud) {
    for (auto& p : cloud->points)
      p.color = {std::uint8_t(rng.uniform_int(0, 255)), std::uint8_t(rng.uniform_int(0, 255)),
                 std::uint8_t(rng.uniform_int(0, 255))};
  };
  scramble(recolored.object_cloud);
  scramble(recolored.target_cloud);
  ControlResult tinted = plan_motion(recolored, params);

  REQUIRE(base.trajectory.size() == tinted.trajectory.size());
  for (std::size_t i = 0; i < base.trajectory.size(); ++i) {
    CHECK(base.trajectory[i].position == tinted.trajectory[i].position);
    CHECK(base.trajectory[i].rotation_euler_deg == tinted.trajectory[i].rotation_euler_deg);
    CHECK(base.trajectory[i].open == tinted.trajectory[i].open);
  }
}

TEST_CASE("control request and result roundtrip their json wire forms") {
  ControlRequest req;
  req.primitive = dsl::Primitive::PushForward;
  req.object_cloud = labeled_cube(Vec3(0.3, 0, 0.02), geom::PointLabel::GoalObject);
  req.target_cloud = labeled_cube(Vec3(0.5, 0.1, 0.01), geom::PointLabel::GoalTarget);
  req.direction = dsl::Direction::Out;
  req.scene_cloud = labeled_cube(Vec3(0.4, 0, 0.02), geom::PointLabel::Obstacle, 20);
  req.gripper_pose.position = Vec3(0.25, 0.0, 0.45);
  req.gripper_pose.rotation = Quat(Eigen::AngleAxisd(0.3, Vec3::UnitZ()));
  req.gripper_open = false;

  ControlRequest back = control_request_from_json(control_request_to_json(req));
  CHECK(back.primitive == req.primitive);
  REQUIRE(back.object_cloud.has_value());
  CHECK(back.object_cloud->size() == req.object_cloud->size());
  CHECK(*back.object_cloud->points[0].label == geom::PointLabel::GoalObject);
  CHECK(back.direction == req.direction);
  CHECK(back.scene_cloud.size() == 20);
  CHECK(!back.gripper_open);
  CHECK((back.gripper_pose.position - req.gripper_pose.position).norm() < 1e-12);

  ControlResult result;
  for (int i = 0; i < 3; ++i) {
    codec::GripperAction action;
    action.position = Vec3(0.1 * i, 0, 0.2);
    action.rotation_euler_deg = Vec3(0, 0, 45.0 * i);
    action.open = i == 2;
    result.trajectory.push_back(action);
  }
  result.stop_at = 2;
  ControlResult parsed = control_result_from_json(control_result_to_json(result));
  REQUIRE(parsed.trajectory.size() == 3);
  CHECK(parsed.stop_at == 2);
  CHECK(parsed.trajectory[2].open);
  CHECK(parsed.trajectory[1].rotation_euler_deg.z() == doctest::Approx(45.0));

  // Malformed results are rejected.
  CHECK_THROWS_AS(control_result_from_json(R"({"trajectory":[],"stop_at":-1})"), Error);
  result.stop_at = 0;
  CHECK_THROWS_AS(control_result_from_json(control_result_to_json(result)), Error);
  ControlResult long_result;
  for (int i = 0; i < 6; ++i) long_result.trajectory.push_back({});
  long_result.stop_at = 5;
  CHECK_THROWS_AS(control_result_from_json(control_result_to_json(long_result)), Error);
}

TEST_CASE("controller selection by key") {
  auto tasks = tasks::builtin_catalog();
  sim::Scene scene = sim::reset(find_task(tasks, "pick_and_lift"), 2);
  ControllerParams params = desk_params(scene);

  ControlRequest req;
  req.primitive = dsl::Primitive::Grasp;
  req.object_cloud = labeled_cube(Vec3(0.3, 0, 0.02), geom::PointLabel::GoalObject);
  req.gripper_pose = scene.gripper.pose;

  SUBCASE("the heuristic key is the built-in planner") {
    ControllerFn heuristic = make_controller("heuristic", params);
    ControlResult via_key = heuristic(req);
    ControlResult direct = plan_motion(req, params);
    REQUIRE(via_key.trajectory.size() == direct.trajectory.size());
    for (std::size_t i = 0; i < via_key.trajectory.size(); ++i)
      CHECK(via_key.trajectory[i].position == direct.trajectory[i].position);
  }

  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(make_controller("learned", params), Error);
    CHECK_THROWS_AS(make_controller("subprocess:", params), Error);
  }

  SUBCASE("a subprocess controller answers over stdin/stdout") {
    // Canned external controller: consume the request, reply from a file.
    ControlResult canned;
    codec::GripperAction action;
    action.position = Vec3(0.31, 0.02, 0.2);
    action.open = true;
    canned.trajectory.push_back(action);
    canned.stop_at = 0;
    auto reply_path = std::filesystem::temp_directory_path() / "manip_controller_reply.json";
    manip::io::write_file(reply_path, control_result_to_json(canned));

    ControllerFn external = make_controller(
        "subprocess:cat >/dev/null && cat '" + reply_path.string() + "'", params);
    ControlResult result = external(req);
    REQUIRE(result.trajectory.size() == 1);
    CHECK((result.trajectory[0].position - Vec3(0.31, 0.02, 0.2)).norm() < 1e-12);
    CHECK(result.trajectory[0].open);

    // Failing subprocesses surface as errors.
    ControllerFn broken = make_controller("subprocess:cat >/dev/null && exit 3", params);
    CHECK_THROWS_AS(broken(req), Error);
  }
}

TEST_CASE("an episode can run end to end through a subprocess controller") {
  // A shell one-liner that ignores the request and replies with a single
  // fixed waypoint: episodes complete (and fail) without crashing the suite.
  auto tasks = tasks::builtin_catalog();
  const sim::TaskSpec& spec = find_task(tasks, "press_button");
  auto reply_path = std::filesystem::temp_directory_path() / "manip_noop_reply.json";
  ControlResult noop;
  codec::GripperAction hold;
  hold.position = Vec3(0.25, 0.0, 0.45);
  hold.open = true;
  noop.trajectory.push_back(hold);
  noop.stop_at = 0;
  manip::io::write_file(reply_path, control_result_to_json(noop));

  eval::HarnessParams params;
  params.controller_key = "subprocess:cat >/dev/null && cat '" + reply_path.string() + "'";
  eval::EpisodeConfig cfg;
  cfg.task_id = spec.task_id;
  cfg.variation = spec.variation;
  eval::EpisodeRecord record = eval::run_episode(spec, cfg, spec.oracle_plan, params);
  CHECK(!record.success);  // holding still never presses the button
  CHECK(record.failure_stage == eval::FailureStage::Control);
  CHECK(record.steps_used >= 1);
}

TEST_CASE("rotate composes about the approach axis") {
  ControllerParams params;
  params.workspace.aabb = Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  ControlRequest req;
  req.primitive = dsl::Primitive::RotateGraspedObject;
  req.gripper_pose = Pose::translation(Vec3(0.2, 0, 0.3));
  req.gripper_open = false;
  ControlResult result = plan_motion(req, params);
  REQUIRE(result.trajectory.size() == 1);
  Quat got = euler_deg_to_quat(result.trajectory[0].rotation_euler_deg);
  Quat expected(Eigen::AngleAxisd(params.rot_step_deg * kDegToRad, Vec3(0, 0, -1)));
  CHECK(std::abs(std::abs(got.dot(expected)) - 1.0) < 1e-9);
  CHECK((result.trajectory[0].position - req.gripper_pose.position).norm() < 1e-12);
}
