// JSON wire forms for ControlRequest/ControlResult and the subprocess
// controller transport. Protocol: the child reads one request JSON document
// on stdin until EOF, writes one result JSON document to stdout, and exits 0.
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "manip/controller.hpp"
#include "manip/io.hpp"

namespace manip::ctrl {

namespace {

using nlohmann::ordered_json;

std::string cloud_b64(const geom::PointCloud& cloud) {
  return io::base64_encode(io::ply_to_string(cloud));
}

geom::PointCloud cloud_from_b64(const std::string& text) {
  return io::ply_from_string(io::base64_decode(text));
}

ordered_json pose_json(const Pose& pose) {
  return ordered_json{{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
                      {"quaternion_wxyz",
                       {pose.rotation.w(), pose.rotation.x(), pose.rotation.y(),
                        pose.rotation.z()}}};
}

std::optional<dsl::Primitive> primitive_from_name(const std::string& name) {
  for (auto p : {dsl::Primitive::Grasp, dsl::Primitive::MoveGraspedObject,
                 dsl::Primitive::RotateGraspedObject, dsl::Primitive::PushDown,
                 dsl::Primitive::PushForward, dsl::Primitive::Release})
    if (name == dsl::primitive_name(p)) return p;
  return std::nullopt;
}

}  // namespace

std::string control_request_to_json(const ControlRequest& request) {
  ordered_json j;
  j["primitive"] = dsl::primitive_name(request.primitive);
  if (request.object_cloud) j["object_cloud_ply_base64"] = cloud_b64(*request.object_cloud);
  if (request.target_cloud) j["target_cloud_ply_base64"] = cloud_b64(*request.target_cloud);
  if (request.direction) j["direction"] = dsl::direction_name(*request.direction);
  j["scene_cloud_ply_base64"] = cloud_b64(request.scene_cloud);
  j["gripper_pose"] = pose_json(request.gripper_pose);
  j["gripper_open"] = request.gripper_open;
  return j.dump() + "\n";
}

ControlRequest control_request_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ControlRequest request;
  auto primitive = primitive_from_name(j.at("primitive").get<std::string>());
  if (!primitive) raise(ErrorCode::UnknownPrimitive, "control request: unknown primitive");
  request.primitive = *primitive;
  if (j.contains("object_cloud_ply_base64"))
    request.object_cloud = cloud_from_b64(j["object_cloud_ply_base64"].get<std::string>());
  if (j.contains("target_cloud_ply_base64"))
    request.target_cloud = cloud_from_b64(j["target_cloud_ply_base64"].get<std::string>());
  if (j.contains("direction")) {
    auto dir = dsl::direction_from_string(j["direction"].get<std::string>());
    if (!dir) raise(ErrorCode::InvalidArgument, "control request: unknown direction");
    request.direction = dir;
  }
  request.scene_cloud = cloud_from_b64(j.at("scene_cloud_ply_base64").get<std::string>());
  const auto& pose = j.at("gripper_pose");
  auto pos = pose.at("position").get<std::vector<double>>();
  auto q = pose.at("quaternion_wxyz").get<std::vector<double>>();
  if (pos.size() != 3 || q.size() != 4)
    raise(ErrorCode::InvalidArgument, "control request: malformed gripper pose");
  request.gripper_pose.position = Vec3(pos[0], pos[1], pos[2]);
  request.gripper_pose.rotation = Quat(q[0], q[1], q[2], q[3]).normalized();
  request.gripper_open = j.at("gripper_open").get<bool>();
  return request;
}

std::string control_result_to_json(const ControlResult& result) {
  ordered_json steps = ordered_json::array();
  for (const auto& action : result.trajectory) {
    steps.push_back(ordered_json{
        {"position", {action.position.x(), action.position.y(), action.position.z()}},
        {"rotation_euler_deg",
         {action.rotation_euler_deg.x(), action.rotation_euler_deg.y(),
          action.rotation_euler_deg.z()}},
        {"open", action.open}});
  }
  return ordered_json{{"trajectory", steps}, {"stop_at", result.stop_at}}.dump() + "\n";
}

ControlResult control_result_from_json(const std::string& text, int max_len) {
  auto j = nlohmann::json::parse(text);
  ControlResult result;
  for (const auto& step : j.at("trajectory")) {
    codec::GripperAction action;
    auto pos = step.at("position").get<std::vector<double>>();
    auto rot = step.at("rotation_euler_deg").get<std::vector<double>>();
    if (pos.size() != 3 || rot.size() != 3)
      raise(ErrorCode::InvalidArgument, "control result: malformed action");
    action.position = Vec3(pos[0], pos[1], pos[2]);
    action.rotation_euler_deg = Vec3(rot[0], rot[1], rot[2]);
    action.open = step.at("open").get<bool>();
    action.normalize_rotation();
    result.trajectory.push_back(action);
  }
  result.stop_at = j.at("stop_at").get<int>();
  if (result.trajectory.empty())
    raise(ErrorCode::EmptyTrajectory, "control result: empty trajectory");
  if (int(result.trajectory.size()) > max_len)
    raise(ErrorCode::TooLong, "control result: trajectory longer than the step budget");
  if (result.stop_at != int(result.trajectory.size()) - 1)
    raise(ErrorCode::InvalidArgument, "control result: stop_at must mark the final step");
  return result;
}

namespace {

// One shell invocation per request: write the request, close stdin, read the
// full reply. The child must consume stdin before replying.
std::string exchange_with_subprocess(const std::string& command, const std::string& request) {
  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0)
    raise(ErrorCode::Internal, "subprocess controller: pipe failed");
  pid_t pid = fork();
  if (pid < 0) raise(ErrorCode::Internal, "subprocess controller: fork failed");
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(to_child[0]);
  close(from_child[1]);

  std::size_t written = 0;
  while (written < request.size()) {
    ssize_t n = write(to_child[1], request.data() + written, request.size() - written);
    if (n <= 0) break;
    written += std::size_t(n);
  }
  close(to_child[1]);

  std::string reply;
  char buffer[4096];
  ssize_t n;
  while ((n = read(from_child[0], buffer, sizeof(buffer))) > 0) reply.append(buffer, std::size_t(n));
  close(from_child[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    raise(ErrorCode::Internal, "subprocess controller exited with status " +
                                   std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1));
  if (written < request.size())
    raise(ErrorCode::Internal, "subprocess controller did not consume the request");
  return reply;
}

}  // namespace

ControllerFn make_controller(const std::string& key, const ControllerParams& params) {
  if (key.empty() || key == "heuristic")
    return [params](const ControlRequest& request) { return plan_motion(request, params); };
  const std::string prefix = "subprocess:";
  if (key.rfind(prefix, 0) == 0) {
    std::string command = key.substr(prefix.size());
    if (command.empty())
      raise(ErrorCode::InvalidArgument, "subprocess controller: empty command");
    int max_len = params.max_trajectory_len;
    return [command, max_len](const ControlRequest& request) {
      std::string reply = exchange_with_subprocess(command, control_request_to_json(request));
      return control_result_from_json(reply, max_len);
    };
  }
  raise(ErrorCode::InvalidArgument, "unknown controller key '" + key + "'");
}

}  // namespace manip::ctrl
