#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "manip/controller.hpp"
#include "manip/sim.hpp"

namespace manip::eval {

struct EpisodeConfig {
  std::string task_id;
  int variation = 0;
  std::uint64_t seed = 0;
  int episode_index = 0;
  int max_steps = 25;
};

enum class FailureStage { None, Parse, Validate, Ground, Control, Timeout };

const char* failure_stage_name(FailureStage stage);

struct EpisodeRecord {
  EpisodeConfig config;
  int level = 1;
  bool success = false;
  int steps_used = 0;
  FailureStage failure_stage = FailureStage::None;
};

struct HarnessParams {
  sim::SimParams sim;
  ctrl::ControllerParams controller;   // workspace is filled per task
  std::string controller_key = "heuristic";  // see ctrl::make_controller
  ground::MergeThresholds merge;
  double min_similarity = 0.5;  // grounding rejects matches below this
  codec::PositionBinning binning;
  codec::RotationBinning rotation_binning;
  double demo_voxel_size = 0.01;  // exported demo clouds are downsampled to this
};

/// One keyframe of a demonstration: the labeled observation and the action
/// taken from it, with its trajectory position.
struct DemoFrame {
  geom::PointCloud labeled_cloud;
  codec::GripperAction action;
  int timestep = 1;
  bool stop = false;
};

using FrameObserver = std::function<void(const DemoFrame&)>;

/// Run one episode: reset, parse, validate, lower, then for each plan step
/// observe -> merge -> ground -> label -> plan motion -> apply waypoints.
/// Stops at success, failure, or the step budget. Never throws on plan or
/// grounding failures; those become the record's failure stage.
EpisodeRecord run_episode(const sim::TaskSpec& spec, const EpisodeConfig& config,
                          const std::string& plan_source, const HarnessParams& params = {},
                          const FrameObserver& observer = {});

struct VariationSummary {
  std::string task_id;
  int variation = 0;
  int level = 1;
  double sr = 0.0;  // percent, one decimal
  int episodes = 0;
};

struct LevelSummary {
  int level = 1;
  double sr_mean = 0.0;  // percent, one decimal
  double sr_std = 0.0;   // population std across seeds, one decimal
};

struct RunReport {
  int seeds = 0;
  int episodes_per_variation = 0;
  int max_steps = 0;
  std::vector<EpisodeRecord> episodes;  // sorted by (task, variation, seed, episode)
  std::vector<VariationSummary> per_variation;
  std::vector<LevelSummary> per_level;
};

struct SuiteOptions {
  std::vector<int> levels;  // empty = all
  int seeds = 5;
  int episodes_per = 20;
  int max_steps = 25;
  int jobs = 1;
  std::optional<std::string> plan_override;  // evaluate this plan on every task
};

/// Deterministic episode seeds: fnv1a(task|variation|seed|episode). Episodes
/// may run in parallel; records are post-sorted so reports are byte-stable.
RunReport run_suite(const std::vector<sim::TaskSpec>& tasks, const SuiteOptions& options,
                    const HarnessParams& params = {});

/// Recompute per-variation and per-level summaries from the episode records.
void aggregate_report(RunReport& report);

std::string report_to_json(const RunReport& report);
std::string report_to_csv(const RunReport& report);

/// Round to one decimal, the tables' reporting precision.
double round1(double value);

/// Write keyframe demonstrations for the oracle plan on each seed:
/// frame_%03d/{cloud.ply, action.json, targets.json} under
/// <out_dir>/<task>_v<variation>/seed_<seed>. Throws OracleFailure and leaves
/// nothing behind when a seed's episode does not succeed.
void export_demos(const sim::TaskSpec& spec, const std::vector<std::uint64_t>& seeds,
                  const std::filesystem::path& out_dir, const HarnessParams& params = {});

}  // namespace manip::eval
