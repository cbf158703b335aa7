#include "manip.h"

#include <cstring>
#include <sstream>

#include <nlohmann/json.hpp>

#include "manip/eval.hpp"
#include "manip/io.hpp"
#include "manip/tasks.hpp"

using nlohmann::ordered_json;

namespace {

thread_local std::string g_last_error;

manip_status status_from(manip::ErrorCode code) {
  return static_cast<manip_status>(static_cast<int>(code));
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
manip_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const manip::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MANIP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MANIP_ERR_INTERNAL;
  }
}

manip_status require(bool ok, const char* what) {
  if (!ok) {
    g_last_error = what;
    return MANIP_ERR_INVALID_ARGUMENT;
  }
  return MANIP_OK;
}

std::vector<manip::sim::TaskSpec> load_suite(const char* suite_dir) {
  if (suite_dir && *suite_dir) return manip::tasks::load_catalog(suite_dir);
  return manip::tasks::builtin_catalog();
}

ordered_json violations_json(const manip::dsl::ValidationReport& report) {
  ordered_json violations = ordered_json::array();
  for (const auto& v : report.violations)
    violations.push_back({{"step", v.step}, {"code", v.code}, {"message", v.message}});
  return ordered_json{{"violations", violations}};
}

ordered_json heatmap_json(const manip::codec::PositionHeatmap& heatmap) {
  const char* names[3] = {"x", "y", "z"};
  ordered_json bins = ordered_json::array();
  ordered_json probs = ordered_json::array();
  for (Eigen::Index i = 0; i < heatmap.bin_positions.rows(); ++i) {
    ordered_json bin_row = ordered_json::array();
    ordered_json prob_row = ordered_json::array();
    for (Eigen::Index j = 0; j < heatmap.bin_positions.cols(); ++j) {
      bin_row.push_back(heatmap.bin_positions(i, j));
      prob_row.push_back(heatmap.probs(i, j));
    }
    bins.push_back(bin_row);
    probs.push_back(prob_row);
  }
  return ordered_json{{"axis", names[int(heatmap.axis)]},
                      {"bin_positions", bins},
                      {"probs", probs},
                      {"degenerate", heatmap.degenerate}};
}

}  // namespace

struct manip_cloud {
  manip::geom::PointCloud cloud;
};

struct manip_plan {
  manip::dsl::Plan plan;
};

extern "C" {

const char* manip_version(void) { return "0.1.0"; }

const char* manip_last_error(void) { return g_last_error.c_str(); }

void manip_string_free(char* s) { std::free(s); }

manip_status manip_cloud_load_ply(const char* path, manip_cloud** out) {
  if (auto bad = require(path && out, "null argument")) return bad;
  return guarded([&] {
    auto handle = std::make_unique<manip_cloud>();
    handle->cloud = manip::io::load_ply(path);
    *out = handle.release();
    return MANIP_OK;
  });
}

manip_status manip_cloud_save_ply(const manip_cloud* cloud, const char* path) {
  if (auto bad = require(cloud && path, "null argument")) return bad;
  return guarded([&] {
    manip::io::save_ply(cloud->cloud, path);
    return MANIP_OK;
  });
}

size_t manip_cloud_size(const manip_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

manip_status manip_cloud_positions(const manip_cloud* cloud, double* xyz) {
  if (auto bad = require(cloud && xyz, "null argument")) return bad;
  for (std::size_t i = 0; i < cloud->cloud.size(); ++i) {
    const auto& p = cloud->cloud.points[i].position;
    xyz[3 * i + 0] = p.x();
    xyz[3 * i + 1] = p.y();
    xyz[3 * i + 2] = p.z();
  }
  return MANIP_OK;
}

void manip_cloud_free(manip_cloud* cloud) { delete cloud; }

manip_status manip_plan_parse(const char* source, manip_plan** out) {
  if (auto bad = require(source && out, "null argument")) return bad;
  return guarded([&] {
    auto handle = std::make_unique<manip_plan>();
    handle->plan = manip::dsl::parse_plan(source);
    *out = handle.release();
    return MANIP_OK;
  });
}

manip_status manip_plan_format(const manip_plan* plan, char** text_out) {
  if (auto bad = require(plan && text_out, "null argument")) return bad;
  return guarded([&] {
    *text_out = dup_string(manip::dsl::format_plan(plan->plan));
    return MANIP_OK;
  });
}

manip_status manip_plan_validate(const manip_plan* plan, char** report_json,
                                 int* violation_count) {
  if (auto bad = require(plan != nullptr, "null plan")) return bad;
  return guarded([&] {
    auto report = manip::dsl::validate_plan(plan->plan);
    if (report_json) *report_json = dup_string(violations_json(report).dump(2) + "\n");
    if (violation_count) *violation_count = int(report.violations.size());
    return MANIP_OK;
  });
}

void manip_plan_free(manip_plan* plan) { delete plan; }

manip_status manip_validate_plan_file(const char* path, char** report_json) {
  if (auto bad = require(path != nullptr, "null path")) return bad;
  std::string source;
  manip_status read_status = guarded([&] {
    source = manip::io::read_file(path);
    return MANIP_OK;
  });
  if (read_status != MANIP_OK) return read_status;

  try {
    manip::dsl::Plan plan = manip::dsl::parse_plan(source);
    auto report = manip::dsl::validate_plan(plan);
    if (report_json) *report_json = dup_string(violations_json(report).dump(2) + "\n");
    return report.ok() ? MANIP_OK : MANIP_ERR_VALIDATION;
  } catch (const manip::dsl::ParseError& e) {
    g_last_error = e.what();
    if (report_json) {
      ordered_json j{{"error",
                      {{"line", e.line()},
                       {"column", e.column()},
                       {"code", manip::error_code_name(e.code())},
                       {"message", e.what()}}}};
      *report_json = dup_string(j.dump(2) + "\n");
    }
    return status_from(e.code());
  } catch (const manip::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  }
}

manip_status manip_encode_action(const char* cloud_ply_path, const char* action_json,
                                 int half_count, double bin_size, char** result_json) {
  if (auto bad = require(cloud_ply_path && action_json && result_json, "null argument")) return bad;
  return guarded([&] {
    manip::geom::PointCloud cloud = manip::io::load_ply(cloud_ply_path);
    std::string text = action_json;
    if (!text.empty() && text[0] != '{') text = manip::io::read_file(text);
    auto j = nlohmann::json::parse(text);
    manip::codec::GripperAction action;
    auto pos = j.at("position").get<std::vector<double>>();
    auto rot = j.at("rotation_euler_deg").get<std::vector<double>>();
    if (pos.size() != 3 || rot.size() != 3)
      manip::raise(manip::ErrorCode::InvalidArgument, "action: position/rotation must have 3 entries");
    action.position = manip::Vec3(pos[0], pos[1], pos[2]);
    action.rotation_euler_deg = manip::Vec3(rot[0], rot[1], rot[2]);
    action.open = j.at("open").get<bool>();
    action.normalize_rotation();

    manip::codec::PositionBinning binning;
    binning.half_count = half_count > 0 ? half_count : 15;
    binning.bin_size = bin_size > 0 ? bin_size : 0.01;
    manip::codec::RotationBinning rotation_binning;

    ordered_json out;
    ordered_json heatmaps = ordered_json::array();
    for (int axis = 0; axis < 3; ++axis) {
      auto heatmap = manip::codec::groundtruth_position_heatmap(cloud, action.position, binning,
                                                                manip::codec::Axis(axis));
      heatmaps.push_back(heatmap_json(heatmap));
    }
    out["heatmaps"] = heatmaps;
    ordered_json rotation_bins = ordered_json::array();
    for (int axis = 0; axis < 3; ++axis)
      rotation_bins.push_back(
          manip::codec::encode_rotation(action.rotation_euler_deg[axis], rotation_binning));
    out["rotation_bins"] = rotation_bins;
    out["open"] = action.open;
    *result_json = dup_string(out.dump(2) + "\n");
    return MANIP_OK;
  });
}

manip_status manip_ground(const char* detections_json_path, const char* query_embedding_json_path,
                          const char* exclude_csv, const char* out_cloud_path,
                          char** result_json) {
  if (auto bad = require(detections_json_path && query_embedding_json_path && result_json,
                         "null argument"))
    return bad;
  return guarded([&] {
    auto detections = manip::ground::load_detections(detections_json_path);
    auto query = manip::ground::load_query_embedding(query_embedding_json_path);
    std::vector<int> exclusions;
    if (exclude_csv && *exclude_csv) {
      std::stringstream ss(exclude_csv);
      std::string token;
      while (std::getline(ss, token, ',')) exclusions.push_back(std::stoi(token));
    }
    auto instances = manip::ground::merge_detections(detections, manip::ground::MergeThresholds{});
    const auto& winner = manip::ground::ground_text(instances, query, exclusions);
    std::string cloud_path = out_cloud_path ? out_cloud_path
                                            : "instance_" + std::to_string(winner.instance_id) +
                                                  ".ply";
    manip::io::save_ply(winner.cloud, cloud_path);
    ordered_json out{{"instance_id", winner.instance_id},
                     {"cloud_path", cloud_path},
                     {"members", winner.members}};
    *result_json = dup_string(out.dump(2) + "\n");
    return MANIP_OK;
  });
}

manip_status manip_export_tasks(const char* dir) {
  if (auto bad = require(dir != nullptr, "null dir")) return bad;
  return guarded([&] {
    manip::tasks::export_catalog(manip::tasks::builtin_catalog(), dir);
    return MANIP_OK;
  });
}

manip_status manip_run_suite(const char* suite_dir, const char* levels_csv, int seeds,
                             int episodes, int max_steps, int jobs, const char* plan_path,
                             const char* controller, char** report_json, char** csv_out) {
  if (auto bad = require(report_json != nullptr, "null report output")) return bad;
  return guarded([&] {
    auto tasks = load_suite(suite_dir);
    manip::eval::SuiteOptions options;
    options.seeds = seeds > 0 ? seeds : 5;
    options.episodes_per = episodes > 0 ? episodes : 20;
    options.max_steps = max_steps > 0 ? max_steps : 25;
    options.jobs = jobs > 0 ? jobs : 1;
    if (levels_csv && *levels_csv) {
      std::stringstream ss(levels_csv);
      std::string token;
      while (std::getline(ss, token, ',')) options.levels.push_back(std::stoi(token));
    }
    if (plan_path && *plan_path) options.plan_override = manip::io::read_file(plan_path);
    manip::eval::HarnessParams params;
    if (controller && *controller) params.controller_key = controller;
    auto report = manip::eval::run_suite(tasks, options, params);
    *report_json = dup_string(manip::eval::report_to_json(report));
    if (csv_out) *csv_out = dup_string(manip::eval::report_to_csv(report));
    return MANIP_OK;
  });
}

manip_status manip_demo_gen(const char* suite_dir, const char* task_id, int variation,
                            uint64_t seed, const char* out_dir) {
  if (auto bad = require(task_id && out_dir, "null argument")) return bad;
  return guarded([&] {
    auto tasks = load_suite(suite_dir);
    for (const auto& spec : tasks) {
      if (spec.task_id == task_id && spec.variation == variation) {
        manip::eval::export_demos(spec, {seed}, out_dir);
        return MANIP_OK;
      }
    }
    manip::raise(manip::ErrorCode::UnknownTask,
                 std::string("demo_gen: no task '") + task_id + "' variation " +
                     std::to_string(variation));
  });
}

}  // extern "C"
