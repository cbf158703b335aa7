#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "helpers.hpp"
#include "manip/eval.hpp"
#include "manip/io.hpp"
#include "manip/tasks.hpp"

using namespace manip;
using namespace manip::eval;

namespace {

const sim::TaskSpec& find_task(const std::vector<sim::TaskSpec>& tasks, const std::string& id,
                               int variation = 0) {
  for (const auto& t : tasks)
    if (t.task_id == id && t.variation == variation) return t;
  REQUIRE(false);
  return tasks.front();
}

EpisodeConfig config_for(const sim::TaskSpec& spec, std::uint64_t seed = 0, int episode = 0) {
  EpisodeConfig cfg;
  cfg.task_id = spec.task_id;
  cfg.variation = spec.variation;
  cfg.seed = seed;
  cfg.episode_index = episode;
  cfg.max_steps = 25;
  return cfg;
}

}  // namespace

TEST_CASE("oracle episode succeeds on the drawer task") {
  auto tasks = tasks::builtin_catalog();
  const sim::TaskSpec& spec = find_task(tasks, "open_drawer", 0);
  EpisodeRecord record = run_episode(spec, config_for(spec), spec.oracle_plan);
  CHECK(record.success);
  CHECK(record.failure_stage == FailureStage::None);
  CHECK(record.steps_used >= 3);
  CHECK(record.steps_used <= 25);
}

TEST_CASE("failure stages are attributed") {
  auto tasks = tasks::builtin_catalog();
  const sim::TaskSpec& spec = find_task(tasks, "pick_and_lift", 0);

  SUBCASE("syntax error -> parse") {
    EpisodeRecord record = run_episode(spec, config_for(spec), "grasp(object=\n");
    CHECK(!record.success);
    CHECK(record.failure_stage == FailureStage::Parse);
  }
  SUBCASE("state machine violation -> validate") {
    EpisodeRecord record = run_episode(spec, config_for(spec), "release()\n");
    CHECK(record.failure_stage == FailureStage::Validate);
  }
  SUBCASE("nonexistent object -> ground") {
    EpisodeRecord record = run_episode(
        spec, config_for(spec), "x = grasp(object=\"flying spaghetti monster\")\n");
    CHECK(record.failure_stage == FailureStage::Ground);
  }
  SUBCASE("part query without its unit in the scene -> ground") {
    EpisodeRecord record = run_episode(
        spec, config_for(spec),
        "x = grasp(object=\"bottom drawer handle\")\nx = move_grasped_object(target=\"out\")\n");
    CHECK(record.failure_stage == FailureStage::Ground);
  }
  SUBCASE("valid plan that does not reach the goal -> control") {
    EpisodeRecord record =
        run_episode(spec, config_for(spec), "x = grasp(object=\"red cube\")\nrelease()\n");
    CHECK(record.failure_stage == FailureStage::Control);
  }
  SUBCASE("step budget exhaustion -> timeout") {
    EpisodeConfig cfg = config_for(spec);
    cfg.max_steps = 2;
    EpisodeRecord record = run_episode(spec, cfg, spec.oracle_plan);
    CHECK(!record.success);
    CHECK(record.failure_stage == FailureStage::Timeout);
    CHECK(record.steps_used == 2);
  }
}

TEST_CASE("suite aggregation arithmetic matches the hand-computed oracle") {
  // Inject per-seed outcomes {60, 80, 100, 80, 80}: mean 80.0, population std
  // sqrt(160) = 12.649... -> 12.6.
  RunReport report;
  report.seeds = 5;
  report.episodes_per_variation = 5;
  report.max_steps = 25;
  int successes_per_seed[5] = {3, 4, 5, 4, 4};
  for (int seed = 0; seed < 5; ++seed) {
    for (int episode = 0; episode < 5; ++episode) {
      EpisodeRecord record;
      record.config.task_id = "synthetic";
      record.config.variation = 0;
      record.config.seed = std::uint64_t(seed);
      record.config.episode_index = episode;
      record.level = 1;
      record.success = episode < successes_per_seed[seed];
      report.episodes.push_back(record);
    }
  }
  aggregate_report(report);
  REQUIRE(report.per_level.size() == 1);
  CHECK(report.per_level[0].sr_mean == doctest::Approx(80.0).epsilon(1e-12));
  CHECK(report.per_level[0].sr_std == doctest::Approx(12.6).epsilon(1e-12));
  REQUIRE(report.per_variation.size() == 1);
  CHECK(report.per_variation[0].sr == doctest::Approx(80.0));
  CHECK(report.per_variation[0].episodes == 25);

  // Recomputing from the records reproduces the summary.
  std::map<std::uint64_t, std::pair<int, int>> per_seed;
  for (const auto& record : report.episodes) {
    per_seed[record.config.seed].first += record.success ? 1 : 0;
    per_seed[record.config.seed].second += 1;
  }
  double mean = 0;
  std::vector<double> srs;
  for (auto& [seed, counts] : per_seed) {
    srs.push_back(100.0 * counts.first / counts.second);
    mean += srs.back();
  }
  mean /= double(srs.size());
  double var = 0;
  for (double sr : srs) var += (sr - mean) * (sr - mean);
  var /= double(srs.size());
  CHECK(std::abs(round1(mean) - report.per_level[0].sr_mean) < 1e-9);
  CHECK(std::abs(round1(std::sqrt(var)) - report.per_level[0].sr_std) < 1e-9);
}

TEST_CASE("suite runs are deterministic and conserve episode counts") {
  auto tasks = tasks::builtin_catalog();
  std::vector<sim::TaskSpec> small;
  small.push_back(find_task(tasks, "press_button", 0));
  small.push_back(find_task(tasks, "open_drawer", 0));

  SuiteOptions options;
  options.seeds = 2;
  options.episodes_per = 2;
  options.max_steps = 25;
  options.jobs = 1;

  RunReport first = run_suite(small, options);
  CHECK(first.episodes.size() == 2 * 2 * 2);
  for (const auto& variation : first.per_variation)
    CHECK(variation.episodes == options.seeds * options.episodes_per);

  RunReport again = run_suite(small, options);
  CHECK(report_to_json(first) == report_to_json(again));

  options.jobs = 4;  // parallel execution must not change the bytes
  RunReport parallel = run_suite(small, options);
  CHECK(report_to_json(first) == report_to_json(parallel));

  // Every failed episode carries exactly one stage; successes carry none.
  for (const auto& record : first.episodes) {
    if (record.success) CHECK(record.failure_stage == FailureStage::None);
    else CHECK(record.failure_stage != FailureStage::None);
  }
}

TEST_CASE("a task whose scene cannot be built fails its episodes, not the suite") {
  auto tasks = tasks::builtin_catalog();
  sim::TaskSpec crowded = tasks.front();
  crowded.task_id = "crowded";
  // Nine sampled cubes into a region far too small: placement must fail.
  sim::ObjectTemplate cube_template;
  cube_template.prototype.name = "c";
  cube_template.prototype.category = "cube";
  cube_template.prototype.geometry = Obb{Vec3(0, 0, 0.02), Vec3(0.02, 0.02, 0.02),
                                         Mat3::Identity()};
  cube_template.sample_position = true;
  cube_template.sample_region = Aabb{Vec3(0.2, 0.0, 0.0), Vec3(0.26, 0.06, 0.0)};
  cube_template.min_separation = 0.06;
  crowded.scene_template.objects.clear();
  for (int i = 0; i < 9; ++i) {
    cube_template.prototype.name = "c" + std::to_string(i);
    crowded.scene_template.objects.push_back(cube_template);
  }
  crowded.success = sim::SuccessCondition{sim::InContact{"c0", "c1"}};
  crowded.oracle_plan = "x = grasp(object=\"cube\")\n";

  std::vector<sim::TaskSpec> suite{crowded, find_task(tasks, "press_button", 0)};
  SuiteOptions options;
  options.seeds = 1;
  options.episodes_per = 1;
  RunReport report = run_suite(suite, options);
  REQUIRE(report.episodes.size() == 2);
  for (const auto& record : report.episodes) {
    if (record.config.task_id == "crowded") {
      CHECK(!record.success);
      CHECK(record.failure_stage == FailureStage::Control);
    } else {
      CHECK(record.success);
    }
  }
}

TEST_CASE("level filter and plan override") {
  auto tasks = tasks::builtin_catalog();
  SuiteOptions options;
  options.seeds = 1;
  options.episodes_per = 1;
  options.levels = {4};
  RunReport report = run_suite(tasks, options);
  for (const auto& record : report.episodes) CHECK(record.level == 4);
  CHECK(!report.episodes.empty());

  // A broken override plan fails every episode at the parse stage.
  options.plan_override = "gibberish(\n";
  RunReport broken = run_suite(tasks, options);
  for (const auto& record : broken.episodes) {
    CHECK(!record.success);
    CHECK(record.failure_stage == FailureStage::Parse);
  }
}

TEST_CASE("demo export writes recomputable keyframes atomically") {
  namespace fs = std::filesystem;
  auto tasks = tasks::builtin_catalog();
  const sim::TaskSpec& pick = find_task(tasks, "pick_and_lift", 0);
  fs::path dir = fs::temp_directory_path() / "manip_demo_test";
  fs::remove_all(dir);

  export_demos(pick, {0}, dir);
  fs::path seed_dir = dir / "pick_and_lift_v0" / "seed_0";
  REQUIRE(fs::is_directory(seed_dir));

  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(seed_dir)) frames.push_back(entry.path());
  std::sort(frames.begin(), frames.end());
  CHECK(frames.size() >= 3);

  codec::PositionBinning binning;
  for (const auto& frame : frames) {
    geom::PointCloud cloud = io::load_ply(frame / "cloud.ply");
    REQUIRE(!cloud.empty());
    for (const auto& p : cloud.points) REQUIRE(p.label.has_value());

    auto action_json = nlohmann::json::parse(io::read_file(frame / "action.json"));
    Vec3 target(action_json["position"][0], action_json["position"][1],
                action_json["position"][2]);
    // Re-running the codec on the exported frame stays non-degenerate.
    for (int axis = 0; axis < 3; ++axis) {
      auto heatmap =
          codec::groundtruth_position_heatmap(cloud, target, binning, codec::Axis(axis));
      CHECK(!heatmap.degenerate);
      CHECK(std::abs(heatmap.probs.sum() - 1.0) < 1e-9);
    }
    auto targets = nlohmann::json::parse(io::read_file(frame / "targets.json"));
    CHECK(targets.contains("rotation_bins"));
    CHECK(targets.contains("position_heatmaps"));
  }
  // The final frame of the episode carries the stop flag.
  auto last = nlohmann::json::parse(io::read_file(frames.back() / "targets.json"));
  CHECK(last["stop"].get<bool>());

  // Re-export reproduces identical bytes.
  std::string before = io::read_file(frames.front() / "cloud.ply") +
                       io::read_file(frames.front() / "targets.json");
  export_demos(pick, {0}, dir);
  std::string after = io::read_file(frames.front() / "cloud.ply") +
                      io::read_file(frames.front() / "targets.json");
  CHECK(before == after);
}

TEST_CASE("demo export fails atomically when the oracle fails") {
  namespace fs = std::filesystem;
  auto tasks = tasks::builtin_catalog();
  sim::TaskSpec broken = find_task(tasks, "pick_and_lift", 0);
  broken.oracle_plan = "x = grasp(object=\"nonexistent thing\")\n";
  fs::path dir = fs::temp_directory_path() / "manip_demo_fail";
  fs::remove_all(dir);
  CHECK_THROWS_AS(export_demos(broken, {0}, dir), Error);
  CHECK(!fs::exists(dir / "pick_and_lift_v0" / "seed_0"));
}

TEST_CASE("report json carries the documented schema") {
  auto tasks = tasks::builtin_catalog();
  std::vector<sim::TaskSpec> one{find_task(tasks, "press_button", 0)};
  SuiteOptions options;
  options.seeds = 1;
  options.episodes_per = 1;
  RunReport report = run_suite(one, options);
  auto j = nlohmann::json::parse(report_to_json(report));
  CHECK(j.contains("meta"));
  CHECK(j["episodes"].is_array());
  CHECK(j["episodes"].size() == 1);
  CHECK(j["summary"]["per_variation"].is_array());
  CHECK(j["summary"]["per_level"].is_object());
  auto csv = report_to_csv(report);
  CHECK(csv.find("task_id,variation,level,episodes,sr") == 0);
}
