#include "manip/tasks.hpp"

#include <algorithm>

#include "manip/io.hpp"

namespace manip::tasks {

using sim::JointKind;
using sim::ObjectTemplate;
using sim::SceneObject;
using sim::SceneTemplate;
using sim::SuccessCondition;
using sim::TaskSpec;

namespace {

geom::Workspace desk_workspace() {
  geom::Workspace ws;
  ws.aabb = Aabb{Vec3(-0.05, -0.45, -0.05), Vec3(0.85, 0.45, 0.65)};
  ws.table_height = 0.0;
  return ws;
}

Pose gripper_home() { return Pose::translation(Vec3(0.25, 0.0, 0.45)); }

SceneObject box(const std::string& name, const std::string& category, const std::string& color,
                const Vec3& half_extents, const Vec3& position, const Vec3& center_offset = Vec3::Zero()) {
  SceneObject obj;
  obj.name = name;
  obj.category = category;
  obj.color = color;
  obj.geometry = Obb{center_offset, half_extents, Mat3::Identity()};
  obj.pose = Pose::translation(position);
  return obj;
}

ObjectTemplate fixed(SceneObject obj) {
  ObjectTemplate t;
  t.prototype = std::move(obj);
  return t;
}

ObjectTemplate sampled(SceneObject obj, const Aabb& region, double min_separation = 0.06) {
  ObjectTemplate t;
  t.prototype = std::move(obj);
  t.sample_position = true;
  t.sample_region = region;
  t.min_separation = min_separation;
  return t;
}

// A small graspable cube resting on the table, origin at its base.
SceneObject cube(const std::string& name, const std::string& color, double half = 0.02) {
  SceneObject obj = box(name, "cube", color, Vec3(half, half, half), Vec3::Zero(),
                        Vec3(0, 0, half));
  obj.graspable = true;
  return obj;
}

Aabb table_region(double x0, double x1, double y0, double y1) {
  return Aabb{Vec3(x0, y0, 0.0), Vec3(x1, y1, 0.0)};
}

SceneObject button(const std::string& name, const std::string& color) {
  SceneObject obj = box(name, "button", color, Vec3(0.02, 0.02, 0.01), Vec3::Zero(),
                        Vec3(0, 0, 0.01));
  obj.anchored = true;
  sim::Joint joint;
  joint.kind = JointKind::Prismatic;
  joint.axis = Vec3(0, 0, 1);
  joint.min = 0.0;
  joint.max = 0.012;
  joint.value = 0.012;  // raised
  obj.joint = joint;
  return obj;
}

TaskSpec base_task(const std::string& task_id, int variation, int level,
                   const std::string& instruction) {
  TaskSpec spec;
  spec.task_id = task_id;
  spec.variation = variation;
  spec.level = level;
  spec.instruction = instruction;
  spec.scene_template.workspace = desk_workspace();
  spec.scene_template.gripper_home = gripper_home();
  return spec;
}

SuccessCondition joint_at_least(const std::string& object, double fraction) {
  return SuccessCondition{sim::JointAtLeast{object, fraction}};
}
SuccessCondition joint_at_most(const std::string& object, double fraction) {
  return SuccessCondition{sim::JointAtMost{object, fraction}};
}
SuccessCondition all_of(std::vector<SuccessCondition> conditions) {
  return SuccessCondition{sim::AllOf{std::move(conditions)}};
}

// --- individual tasks --------------------------------------------------------

TaskSpec press_button(int variation, const std::string& color) {
  TaskSpec spec = base_task("press_button", variation, 1, "push the " + color + " button");
  spec.scene_template.objects.push_back(
      sampled(button("button_" + color, color), table_region(0.2, 0.5, -0.25, 0.25), 0.08));
  spec.success = joint_at_most("button_" + color, 0.0);
  spec.oracle_plan = "# query: push the " + color + " button.\n" +
                     "button = push_down(object=\"" + color + " button\")\n";
  return spec;
}

TaskSpec push_buttons_seq(int variation, const std::vector<std::string>& order) {
  std::string sequence;
  for (std::size_t i = 0; i < order.size(); ++i)
    sequence += (i ? " then the " : "") + order[i] + " button";
  TaskSpec spec = base_task("push_buttons_seq", variation, 4, "push the " + sequence);
  for (const char* color : {"navy", "teal", "orange", "white"})
    spec.scene_template.objects.push_back(sampled(button(std::string("button_") + color, color),
                                                  table_region(0.2, 0.55, -0.3, 0.3), 0.12));
  std::vector<std::string> names;
  spec.oracle_plan = "# query: push the " + sequence + ".\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    names.push_back("button_" + order[i]);
    spec.oracle_plan += "button_" + std::to_string(i + 1) + " = push_down(object=\"" + order[i] +
                        " button\")\n";
  }
  spec.success = SuccessCondition{sim::PressedInOrder{names}};
  return spec;
}

TaskSpec pick_and_lift(int variation, int level, const std::string& color,
                       const std::string& d1, const std::string& d2) {
  TaskSpec spec = base_task("pick_and_lift", variation, level,
                            "pick up the " + color + " cube and lift it up to the target");
  SceneObject ball = box("target_ball", "ball", "red", Vec3(0.04, 0.04, 0.04), Vec3(0.6, 0.0, 0.3));
  ball.anchored = true;
  spec.scene_template.objects.push_back(fixed(ball));
  Aabb region = table_region(0.15, 0.45, -0.3, 0.3);
  spec.scene_template.objects.push_back(sampled(cube("cube_" + color, color), region, 0.1));
  spec.scene_template.objects.push_back(sampled(cube("cube_" + d1, d1), region, 0.1));
  spec.scene_template.objects.push_back(sampled(cube("cube_" + d2, d2), region, 0.1));
  spec.success = SuccessCondition{sim::InContact{"cube_" + color, "target_ball"}};
  spec.oracle_plan = "# query: lift the " + color + " block up to the target.\n" +
                     "block = grasp(object=\"" + color + " cube\")\n" +
                     "block = move_grasped_object(target=\"red ball\")\n";
  return spec;
}

TaskSpec pick_up_cup() {
  TaskSpec spec = base_task("pick_up_cup", 0, 1, "pick up the orange cup");
  SceneObject zone = box("lift_zone", "zone", "", Vec3(0.35, 0.4, 0.2), Vec3(0.35, 0.0, 0.35));
  zone.visible = false;
  spec.scene_template.objects.push_back(fixed(zone));
  Aabb region = table_region(0.15, 0.45, -0.3, 0.3);
  for (const char* color : {"orange", "magenta", "silver"}) {
    SceneObject cup = box(std::string("cup_") + color, "cup", color, Vec3(0.03, 0.03, 0.06),
                          Vec3::Zero(), Vec3(0, 0, 0.06));
    cup.graspable = true;
    spec.scene_template.objects.push_back(sampled(cup, region, 0.1));
  }
  spec.success = SuccessCondition{sim::Contains{"lift_zone", "cup_orange"}};
  spec.oracle_plan =
      "# query: lift the orange cup.\n"
      "orange_cup = grasp(object=\"orange cup\")\n"
      "orange_cup = move_grasped_object(target=\"up\")\n";
  return spec;
}

SceneObject platform(const std::string& name, const std::string& color, const Vec3& position) {
  SceneObject obj = box(name, "square", color, Vec3(0.06, 0.06, 0.005), position,
                        Vec3(0, 0, 0.005));
  obj.anchored = true;
  return obj;
}

TaskSpec slide_block() {
  TaskSpec spec = base_task("slide_block", 0, 1, "slide the block onto the green target");
  spec.scene_template.objects.push_back(fixed(platform("target_green", "green", Vec3(0.55, 0.2, 0))));
  spec.scene_template.objects.push_back(fixed(platform("target_blue", "blue", Vec3(0.55, -0.2, 0))));
  spec.scene_template.objects.push_back(
      sampled(cube("cube_red", "red"), table_region(0.2, 0.35, -0.1, 0.1), 0.08));
  spec.success = SuccessCondition{sim::OnTopOfArea{"target_green", {"cube_red"}, 1}};
  spec.oracle_plan =
      "# query: push the block until it is sitting on top of the green target.\n"
      "cube = push_forward(object=\"red cube\", target=\"green square\")\n";
  return spec;
}

TaskSpec reach_and_drag() {
  TaskSpec spec = base_task("reach_and_drag", 0, 1, "use the stick to drag the cube onto the teal target");
  spec.scene_template.objects.push_back(fixed(platform("target_teal", "teal", Vec3(0.6, 0.15, 0))));
  spec.scene_template.objects.push_back(fixed(platform("target_black", "black", Vec3(0.6, -0.15, 0))));
  SceneObject stick = box("stick", "stick", "", Vec3(0.08, 0.01, 0.01), Vec3::Zero(),
                          Vec3(0, 0, 0.01));
  stick.graspable = true;
  spec.scene_template.objects.push_back(sampled(stick, table_region(0.15, 0.28, -0.15, 0.15), 0.08));
  spec.scene_template.objects.push_back(
      sampled(cube("cube_gray", "gray"), table_region(0.32, 0.42, -0.12, 0.12), 0.08));
  spec.success = SuccessCondition{sim::OnTopOfArea{"target_teal", {"cube_gray"}, 1}};
  spec.oracle_plan =
      "# query: use the stick to drag the cube onto the teal target.\n"
      "stick = grasp(object=\"stick\")\n"
      "cube = push_forward(object=\"gray cube\", target=\"teal square\")\n";
  return spec;
}

TaskSpec close_jar() {
  TaskSpec spec = base_task("close_jar", 0, 1, "screw on the violet jar lid");
  SceneObject jar = box("jar_violet", "jar", "violet", Vec3(0.035, 0.035, 0.05), Vec3(0.55, 0.12, 0),
                        Vec3(0, 0, 0.05));
  SceneObject distractor = box("jar_azure", "jar", "azure", Vec3(0.035, 0.035, 0.05),
                               Vec3(0.55, -0.12, 0), Vec3(0, 0, 0.05));
  jar.anchored = true;
  distractor.anchored = true;
  spec.scene_template.objects.push_back(fixed(jar));
  spec.scene_template.objects.push_back(fixed(distractor));
  SceneObject lid = box("lid_gray", "lid", "gray", Vec3(0.04, 0.04, 0.008), Vec3::Zero(),
                        Vec3(0, 0, 0.008));
  lid.graspable = true;
  sim::Joint screw;
  screw.kind = JointKind::Revolute;
  screw.axis = Vec3(0, 0, -1);
  screw.min = 0.0;
  screw.max = 90.0;
  screw.value = 0.0;
  lid.joint = screw;  // free screw progress; the pose still moves rigidly
  spec.scene_template.objects.push_back(sampled(lid, table_region(0.18, 0.35, -0.2, 0.2), 0.08));
  spec.success = all_of({SuccessCondition{sim::InContact{"lid_gray", "jar_violet"}},
                         joint_at_least("lid_gray", 1.0)});
  spec.oracle_plan =
      "# query: screw on the violet jar lid.\n"
      "lid = grasp(object=\"gray lid\")\n"
      "lid = move_grasped_object(target=\"violet jar\")\n"
      "lid = rotate_grasped_object()\n"
      "release()\n";
  return spec;
}

TaskSpec close_laptop_lid() {
  TaskSpec spec = base_task("close_laptop_lid", 0, 1, "close the laptop lid");
  SceneObject base = box("laptop_base", "laptop", "", Vec3(0.10, 0.12, 0.01), Vec3(0.5, 0.0, 0),
                         Vec3(0, 0, 0.01));
  base.anchored = true;
  spec.scene_template.objects.push_back(fixed(base));
  SceneObject lid = box("laptop_lid", "laptop lid", "", Vec3(0.10, 0.12, 0.008),
                        Vec3(0.6, 0.0, 0.02), Vec3(-0.10, 0, 0.008));
  lid.graspable = true;
  lid.anchored = true;
  sim::Joint hinge;
  hinge.kind = JointKind::Revolute;
  hinge.axis = Vec3(0, 1, 0);
  hinge.min = 0.0;   // closed, lid flat over the base
  hinge.max = 90.0;  // upright
  hinge.value = 40.0;
  lid.joint = hinge;
  spec.scene_template.objects.push_back(fixed(lid));
  spec.success = joint_at_most("laptop_lid", 0.0);
  spec.oracle_plan =
      "# query: close laptop lid.\n"
      "laptop_lid = grasp(object=\"laptop lid\")\n"
      "laptop_lid = move_grasped_object(target=\"down\")\n"
      "release()\n";
  return spec;
}

TaskSpec close_fridge() {
  TaskSpec spec = base_task("close_fridge", 0, 1, "close the fridge");
  SceneObject body = box("fridge_body", "fridge", "", Vec3(0.08, 0.08, 0.15), Vec3(0.62, 0.1, 0),
                         Vec3(0, 0, 0.15));
  body.anchored = true;
  spec.scene_template.objects.push_back(fixed(body));
  SceneObject door = box("fridge_door", "fridge door", "", Vec3(0.01, 0.08, 0.15),
                         Vec3(0.54, 0.18, 0), Vec3(-0.01, -0.08, 0.15));
  door.anchored = true;
  sim::Joint hinge;
  hinge.kind = JointKind::Revolute;
  hinge.axis = Vec3(0, 0, 1);
  hinge.min = -90.0;  // fully open
  hinge.max = 0.0;    // closed against the body
  hinge.value = -20.0;
  door.joint = hinge;
  spec.scene_template.objects.push_back(fixed(door));
  spec.success = all_of({joint_at_least("fridge_door", 1.0),
                         SuccessCondition{sim::InContact{"fridge_door", "fridge_body"}}});
  spec.oracle_plan =
      "# query: close fridge.\n"
      "fridge_door = push_forward(object=\"fridge door\")\n";
  return spec;
}

void add_drawer_unit(TaskSpec& spec) {
  // Open-frame stand: two side poles, a top bar, three prismatic fronts.
  // Unit height 0.4; level bands are [0.1,0.2] / [0.2,0.3] / [0.3,0.4].
  for (double y : {-0.17, 0.17}) {
    SceneObject pole = box(y < 0 ? "drawer_pole_left" : "drawer_pole_right", "drawer", "",
                           Vec3(0.015, 0.015, 0.2), Vec3(0.565, y, 0), Vec3(0, 0, 0.2));
    pole.anchored = true;
    spec.scene_template.objects.push_back(fixed(pole));
  }
  SceneObject bar = box("drawer_top_bar", "drawer", "", Vec3(0.015, 0.17, 0.015),
                        Vec3(0.565, 0.0, 0), Vec3(0, 0, 0.385));
  bar.anchored = true;
  spec.scene_template.objects.push_back(fixed(bar));
  const char* names[3] = {"drawer_bottom", "drawer_middle", "drawer_top"};
  const double centers[3] = {0.145, 0.245, 0.345};
  for (int i = 0; i < 3; ++i) {
    SceneObject front = box(names[i], "drawer", "", Vec3(0.02, 0.15, 0.045), Vec3(0.55, 0.0, 0),
                            Vec3(0, 0, centers[i]));
    front.graspable = true;
    front.anchored = true;
    sim::Joint slide;
    slide.kind = JointKind::Prismatic;
    slide.axis = Vec3(-1, 0, 0);  // pulls out toward the robot
    slide.min = 0.0;
    slide.max = 0.12;
    slide.value = 0.0;
    front.joint = slide;
    spec.scene_template.objects.push_back(fixed(front));
  }
}

TaskSpec open_drawer(int variation, int level, const std::string& which) {
  TaskSpec spec = base_task("open_drawer", variation, level, "open the " + which + " drawer");
  add_drawer_unit(spec);
  spec.success = joint_at_least("drawer_" + which, 1.0);  // fully extended
  spec.oracle_plan = "# query: open " + which + " drawer.\n" +
                     which + "_handle = grasp(object=\"" + which + " drawer handle\")\n" +
                     which + "_handle = move_grasped_object(target=\"out\")\n" +
                     "release()\n";
  return spec;
}

TaskSpec open_box() {
  TaskSpec spec = base_task("open_box", 0, 1, "open the box");
  SceneObject base = box("box_base", "box", "", Vec3(0.08, 0.08, 0.03), Vec3(0.45, -0.25, 0),
                         Vec3(0, 0, 0.03));
  base.anchored = true;
  spec.scene_template.objects.push_back(fixed(base));
  SceneObject lid = box("box_lid", "box lid", "", Vec3(0.08, 0.08, 0.008), Vec3(0.53, -0.25, 0.06),
                        Vec3(-0.08, 0, 0.008));
  lid.graspable = true;
  lid.anchored = true;
  sim::Joint hinge;
  hinge.kind = JointKind::Revolute;
  hinge.axis = Vec3(0, 1, 0);
  hinge.min = 0.0;   // closed
  hinge.max = 90.0;  // open upright
  hinge.value = 0.0;
  lid.joint = hinge;
  spec.scene_template.objects.push_back(fixed(lid));
  spec.success = joint_at_least("box_lid", 1.0);
  spec.oracle_plan =
      "# query: open box.\n"
      "box_lid = grasp(object=\"box lid\")\n"
      "box_lid = move_grasped_object(target=\"up\")\n"
      "release()\n";
  return spec;
}

void add_safe(TaskSpec& spec) {
  // Open-front safe, height 0.5: back wall, two side walls, a top plate, and
  // three shelf slabs (floor, middle, top). Shelf bands: [0,0.1] / [0.15,0.25]
  // / [0.3,0.4].
  auto wall = [&](const std::string& name, const Vec3& half, const Vec3& center) {
    SceneObject obj = box(name, "safe", "", half, Vec3(0.57, 0.0, 0), center);
    obj.anchored = true;
    spec.scene_template.objects.push_back(fixed(obj));
  };
  wall("safe_back", Vec3(0.01, 0.12, 0.25), Vec3(0.08, 0, 0.25));
  wall("safe_side_left", Vec3(0.09, 0.01, 0.25), Vec3(0, -0.11, 0.25));
  wall("safe_side_right", Vec3(0.09, 0.01, 0.25), Vec3(0, 0.11, 0.25));
  wall("safe_top", Vec3(0.09, 0.10, 0.01), Vec3(0, 0, 0.49));
  wall("safe_shelf_floor", Vec3(0.09, 0.10, 0.01), Vec3(0, 0, 0.01));
  wall("safe_shelf_middle", Vec3(0.09, 0.10, 0.01), Vec3(0, 0, 0.16));
  wall("safe_shelf_top", Vec3(0.09, 0.10, 0.01), Vec3(0, 0, 0.31));
}

TaskSpec put_money(int variation, const std::string& which, double region_low, double region_high) {
  TaskSpec spec = base_task("put_money_in_safe", variation, 1,
                            "put the money on the " + which + " shelf of the safe");
  add_safe(spec);
  SceneObject region = box("region_" + which, "region", "",
                           Vec3(0.07, 0.09, 0.5 * (region_high - region_low)),
                           Vec3(0.57, 0.0, 0.5 * (region_low + region_high)));
  region.visible = false;
  spec.scene_template.objects.push_back(fixed(region));
  SceneObject money = box("money", "money", "", Vec3(0.04, 0.02, 0.008), Vec3::Zero(),
                          Vec3(0, 0, 0.008));
  money.graspable = true;
  spec.scene_template.objects.push_back(sampled(money, table_region(0.15, 0.35, -0.2, 0.2), 0.08));
  spec.success = SuccessCondition{sim::Contains{"region_" + which, "money"}};
  spec.oracle_plan = "# query: leave the money on the " + which + " shelf on the safe.\n" +
                     "money = grasp(object=\"money\")\n" +
                     "money = move_grasped_object(target=\"" + which + " shelf\")\n" +
                     "release()\n";
  return spec;
}

TaskSpec stack_blocks() {
  TaskSpec spec = base_task("stack_blocks", 0, 1,
                            "pick up and set down 2 purple blocks on top of each other");
  spec.scene_template.objects.push_back(
      fixed(platform("platform_green", "green", Vec3(0.55, -0.3, 0))));
  Aabb region = table_region(0.15, 0.4, -0.25, 0.25);
  spec.scene_template.objects.push_back(sampled(cube("cube_purple_1", "purple"), region, 0.1));
  spec.scene_template.objects.push_back(sampled(cube("cube_purple_2", "purple"), region, 0.1));
  spec.scene_template.objects.push_back(sampled(cube("cube_teal_1", "teal"), region, 0.1));
  spec.scene_template.objects.push_back(sampled(cube("cube_teal_2", "teal"), region, 0.1));
  spec.success =
      SuccessCondition{sim::OnTopOfArea{"platform_green", {"cube_purple_1", "cube_purple_2"}, 2}};
  spec.oracle_plan =
      "# query: pick up and set down 2 purple blocks on top of each other.\n"
      "purple_cube_1 = grasp(object=\"purple cube\")\n"
      "purple_cube_1 = move_grasped_object(target=\"green square\")\n"
      "release()\n"
      "purple_cube_2 = grasp(object=\"purple cube\", not=[purple_cube_1])\n"
      "purple_cube_2 = move_grasped_object(target=purple_cube_1)\n"
      "release()\n";
  return spec;
}

}  // namespace

std::vector<TaskSpec> builtin_catalog() {
  std::vector<TaskSpec> tasks;
  tasks.push_back(press_button(0, "maroon"));
  tasks.push_back(press_button(1, "navy"));
  tasks.push_back(press_button(2, "yellow"));
  tasks.push_back(push_buttons_seq(0, {"navy", "teal"}));
  tasks.push_back(push_buttons_seq(1, {"navy", "teal", "orange", "white"}));
  tasks.push_back(pick_and_lift(0, 1, "red", "lime", "blue"));
  tasks.push_back(pick_and_lift(1, 2, "teal", "red", "lime"));
  tasks.push_back(pick_up_cup());
  tasks.push_back(slide_block());
  tasks.push_back(reach_and_drag());
  tasks.push_back(close_jar());
  tasks.push_back(close_laptop_lid());
  tasks.push_back(close_fridge());
  tasks.push_back(open_drawer(0, 1, "bottom"));
  tasks.push_back(open_drawer(1, 1, "top"));
  tasks.push_back(open_drawer(2, 3, "middle"));
  tasks.push_back(open_box());
  tasks.push_back(put_money(0, "bottom", 0.02, 0.15));
  tasks.push_back(put_money(1, "middle", 0.17, 0.30));
  tasks.push_back(stack_blocks());
  return tasks;
}

void export_catalog(const std::vector<TaskSpec>& tasks, const std::filesystem::path& dir) {
  for (const TaskSpec& spec : tasks) {
    auto task_dir = dir / spec.task_id;
    io::write_file(task_dir / (std::to_string(spec.variation) + ".json"), sim::task_to_json(spec));
    io::write_file(task_dir / (std::to_string(spec.variation) + ".lp"), spec.oracle_plan);
  }
}

std::vector<TaskSpec> load_catalog(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) raise(ErrorCode::Io, "load_catalog: not a directory: " + dir.string());
  std::vector<TaskSpec> tasks;
  std::vector<fs::path> json_files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      json_files.push_back(entry.path());
  }
  std::sort(json_files.begin(), json_files.end());
  for (const fs::path& file : json_files) {
    TaskSpec spec = sim::task_from_json(io::read_file(file));
    fs::path plan_file = file;
    plan_file.replace_extension(".lp");
    if (fs::exists(plan_file)) spec.oracle_plan = io::read_file(plan_file);
    tasks.push_back(std::move(spec));
  }
  if (tasks.empty()) raise(ErrorCode::Io, "load_catalog: no task specs under " + dir.string());
  return tasks;
}

}  // namespace manip::tasks
