// Command-line front end. Talks to the engine exclusively through the C API
// in manip.h; the only other dependency is CLI11 for argument parsing.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "manip.h"

namespace {

int fail(manip_status status) {
  std::fprintf(stderr, "error: %s\n", manip_last_error());
  return status == MANIP_ERR_VALIDATION ? 2 : 1;
}

bool write_text(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  std::fputs(text, f);
  std::fclose(f);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabletop manipulation engine"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run the evaluation protocol over a task suite");
  std::string suite, levels, out_path, csv_path, plan_path, controller;
  int seeds = 5, episodes = 20, max_steps = 25, jobs = 1;
  run->add_option("--suite", suite, "task catalog directory (default: bundled catalog)");
  run->add_option("--levels", levels, "comma-separated generalization levels, e.g. 1,4");
  run->add_option("--seeds", seeds, "number of evaluation seeds")->check(CLI::PositiveNumber);
  run->add_option("--episodes", episodes, "episodes per task variation per seed")
      ->check(CLI::PositiveNumber);
  run->add_option("--max-steps", max_steps, "step budget per episode")->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "parallel episode workers")->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "write the JSON report here (default: stdout)");
  run->add_option("--csv", csv_path, "also write a CSV summary");
  run->add_option("--plan", plan_path, "evaluate this plan file instead of the oracle plans");
  run->add_option("--controller", controller,
                  "motion controller key: heuristic (default) or subprocess:<command>");

  // validate-plan
  auto* validate = app.add_subcommand("validate-plan", "parse and statically check a plan file");
  std::string plan_file;
  validate->add_option("file", plan_file, "plan file (.lp)")->required();

  // encode
  auto* encode = app.add_subcommand("encode", "encode an action into classification targets");
  std::string cloud_path, action_json;
  int bins_m = 15;
  double bin_size = 0.01;
  encode->add_option("--cloud", cloud_path, "labeled point cloud (PLY)")->required();
  encode->add_option("--action", action_json, "action JSON (inline or a file path)")->required();
  encode->add_option("--m", bins_m, "bins per side per point");
  encode->add_option("--b", bin_size, "bin size in meters");

  // ground
  auto* ground = app.add_subcommand("ground", "resolve a text query embedding to an instance");
  std::string detections_path, query_path, exclude, out_cloud;
  ground->add_option("--detections", detections_path, "detections JSON file")->required();
  ground->add_option("--query-embedding", query_path, "query embedding JSON file")->required();
  ground->add_option("--exclude", exclude, "comma-separated instance ids to skip");
  ground->add_option("--out-cloud", out_cloud, "where to write the winning instance cloud");

  // demo-gen
  auto* demo = app.add_subcommand("demo-gen", "export oracle keyframe demonstrations");
  std::string demo_task, demo_out, demo_suite;
  int demo_variation = 0;
  std::uint64_t demo_seed = 0;
  demo->add_option("--task", demo_task, "task id")->required();
  demo->add_option("--variation", demo_variation, "task variation");
  demo->add_option("--seed", demo_seed, "evaluation seed");
  demo->add_option("--out", demo_out, "output directory")->required();
  demo->add_option("--suite", demo_suite, "task catalog directory (default: bundled catalog)");

  // init-tasks
  auto* init = app.add_subcommand("init-tasks", "write the bundled task catalog to a directory");
  std::string init_dir;
  init->add_option("dir", init_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    char* report = nullptr;
    char* csv = nullptr;
    manip_status status = manip_run_suite(
        suite.empty() ? nullptr : suite.c_str(), levels.empty() ? nullptr : levels.c_str(), seeds,
        episodes, max_steps, jobs, plan_path.empty() ? nullptr : plan_path.c_str(),
        controller.empty() ? nullptr : controller.c_str(), &report,
        csv_path.empty() ? nullptr : &csv);
    if (status != MANIP_OK) return fail(status);
    if (out_path.empty()) {
      std::fputs(report, stdout);
    } else if (!write_text(out_path, report)) {
      std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
      return 1;
    }
    if (csv && !csv_path.empty() && !write_text(csv_path, csv)) {
      std::fprintf(stderr, "error: cannot write %s\n", csv_path.c_str());
      return 1;
    }
    manip_string_free(report);
    manip_string_free(csv);
    return 0;
  }

  if (validate->parsed()) {
    char* report = nullptr;
    manip_status status = manip_validate_plan_file(plan_file.c_str(), &report);
    if (report) {
      std::fputs(report, stdout);
      manip_string_free(report);
    }
    if (status == MANIP_OK) return 0;
    if (status == MANIP_ERR_VALIDATION) return 2;
    std::fprintf(stderr, "error: %s\n", manip_last_error());
    return 1;
  }

  if (encode->parsed()) {
    char* result = nullptr;
    manip_status status =
        manip_encode_action(cloud_path.c_str(), action_json.c_str(), bins_m, bin_size, &result);
    if (status != MANIP_OK) return fail(status);
    std::fputs(result, stdout);
    manip_string_free(result);
    return 0;
  }

  if (ground->parsed()) {
    char* result = nullptr;
    manip_status status = manip_ground(detections_path.c_str(), query_path.c_str(),
                                       exclude.empty() ? nullptr : exclude.c_str(),
                                       out_cloud.empty() ? nullptr : out_cloud.c_str(), &result);
    if (status != MANIP_OK) return fail(status);
    std::fputs(result, stdout);
    manip_string_free(result);
    return 0;
  }

  if (demo->parsed()) {
    manip_status status =
        manip_demo_gen(demo_suite.empty() ? nullptr : demo_suite.c_str(), demo_task.c_str(),
                       demo_variation, demo_seed, demo_out.c_str());
    if (status != MANIP_OK) return fail(status);
    std::printf("demos written to %s\n", demo_out.c_str());
    return 0;
  }

  if (init->parsed()) {
    manip_status status = manip_export_tasks(init_dir.c_str());
    if (status != MANIP_OK) return fail(status);
    std::printf("task catalog written to %s\n", init_dir.c_str());
    return 0;
  }

  return 1;
}
