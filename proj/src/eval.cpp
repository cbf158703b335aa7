#include "manip/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "manip/io.hpp"

namespace manip::eval {

using nlohmann::ordered_json;

const char* failure_stage_name(FailureStage stage) {
  switch (stage) {
    case FailureStage::None: return "none";
    case FailureStage::Parse: return "parse";
    case FailureStage::Validate: return "validate";
    case FailureStage::Ground: return "ground";
    case FailureStage::Control: return "control";
    case FailureStage::Timeout: return "timeout";
  }
  return "?";
}

double round1(double value) { return std::round(value * 10.0) / 10.0; }

namespace {

std::uint64_t episode_seed(const EpisodeConfig& cfg) {
  return fnv1a(cfg.task_id + "|" + std::to_string(cfg.variation) + "|" +
               std::to_string(cfg.seed) + "|" + std::to_string(cfg.episode_index));
}

// Position-identity lookup from observation points to their owning object.
class OwnerIndex {
public:
  explicit OwnerIndex(const sim::Observation& obs) {
    map_.reserve(obs.cloud.size());
    for (std::size_t i = 0; i < obs.cloud.size(); ++i)
      map_.try_emplace(key(obs.cloud.points[i].position), obs.owners[i]);
  }

  const std::string* owner(const Vec3& position) const {
    auto it = map_.find(key(position));
    return it == map_.end() ? nullptr : &it->second;
  }

  std::string majority_owner(const geom::PointCloud& cloud) const {
    std::map<std::string, int> counts;
    for (const auto& p : cloud.points) {
      if (const std::string* name = owner(p.position)) ++counts[*name];
    }
    std::string best;
    int best_count = 0;
    for (const auto& [name, count] : counts) {
      if (name != sim::kGripperOwner && count > best_count) {
        best = name;
        best_count = count;
      }
    }
    return best;
  }

private:
  static std::string key(const Vec3& p) {
    char buf[3 * sizeof(double)];
    double v[3] = {p.x(), p.y(), p.z()};
    std::memcpy(buf, v, sizeof(buf));
    return std::string(buf, sizeof(buf));
  }

  std::unordered_map<std::string, std::string> map_;
};

geom::PointCloud owned_points(const sim::Observation& obs, const std::string& name) {
  geom::PointCloud out;
  for (std::size_t i = 0; i < obs.cloud.size(); ++i)
    if (obs.owners[i] == name) out.points.push_back(obs.cloud.points[i]);
  return out;
}

// Unit whose height band resolves a part query: drawer handles live on a
// drawer unit, shelves on a safe.
std::string part_base_query(ground::PartKind kind) {
  return kind == ground::PartKind::DrawerHandle ? "drawer" : "safe";
}

bool looks_like_part_query(const std::string& text) {
  auto has = [&](const char* w) { return text.find(w) != std::string::npos; };
  return (has("drawer handle") || has("shelf")) &&
         (has("bottom") || has("middle") || has("top"));
}

struct GroundedRef {
  geom::PointCloud cloud;
  std::string owner;  // scene object carrying most of the points
};

}  // namespace

EpisodeRecord run_episode(const sim::TaskSpec& spec, const EpisodeConfig& config,
                          const std::string& plan_source, const HarnessParams& params,
                          const FrameObserver& observer) {
  if (config.max_steps < 1) raise(ErrorCode::InvalidArgument, "run_episode: max_steps must be >= 1");
  if (spec.task_id != config.task_id || spec.variation != config.variation)
    raise(ErrorCode::UnknownTask, "run_episode: config does not match the task spec");

  EpisodeRecord record;
  record.config = config;
  record.level = spec.level;

  dsl::Plan plan;
  try {
    plan = dsl::parse_plan(plan_source);
  } catch (const dsl::ParseError&) {
    record.failure_stage = FailureStage::Parse;
    return record;
  }
  if (!dsl::validate_plan(plan).ok()) {
    record.failure_stage = FailureStage::Validate;
    return record;
  }
  std::vector<dsl::ResolvedStep> steps = dsl::lower_plan(plan);

  std::unordered_map<int, std::string> binding_owner;  // plan step -> scene object

  try {
    sim::Scene scene = sim::reset(spec, episode_seed(config), params.sim);
    ctrl::ControllerParams cparams = params.controller;
    cparams.workspace = scene.workspace;
    ctrl::ControllerFn controller = ctrl::make_controller(params.controller_key, cparams);

    for (std::size_t step_index = 0; step_index < steps.size(); ++step_index) {
      const dsl::ResolvedStep& step = steps[step_index];
      sim::Observation obs = sim::observe(scene, params.sim);
      OwnerIndex owners(obs);
      std::vector<ground::Instance> instances = ground::merge_detections(obs.detections,
                                                                         params.merge);

      auto resolve = [&](const dsl::ResolvedRef& ref,
                         const std::vector<int>& exclusion_steps) -> GroundedRef {
        if (const auto* query = std::get_if<dsl::TextQuery>(&ref)) {
          if (looks_like_part_query(query->text)) {
            ground::PartQuery part = ground::parse_part(query->text);
            const ground::Instance& unit =
                ground::ground_text(instances, ground::embed_text(part_base_query(part.kind)), {},
                                    params.min_similarity);
            double total_height = 0.0;
            for (const auto& p : unit.cloud.points)
              total_height = std::max(total_height,
                                      p.position.z() - scene.workspace.table_height);
            auto [low, high] = ground::part_height_range(part, total_height);
            geom::PointCloud band =
                ground::filter_by_height(unit, low, high, scene.workspace.table_height);
            return GroundedRef{band, owners.majority_owner(band)};
          }
          std::vector<int> excluded_ids;
          for (int ex_step : exclusion_steps) {
            auto it = binding_owner.find(ex_step);
            if (it == binding_owner.end()) continue;
            for (const ground::Instance& inst : instances)
              if (owners.majority_owner(inst.cloud) == it->second)
                excluded_ids.push_back(inst.instance_id);
          }
          const ground::Instance& inst = ground::ground_text(
              instances, ground::embed_text(query->text), excluded_ids, params.min_similarity);
          return GroundedRef{inst.cloud, owners.majority_owner(inst.cloud)};
        }
        if (const auto* bound = std::get_if<dsl::StepRef>(&ref)) {
          auto it = binding_owner.find(bound->step_index);
          if (it == binding_owner.end() || it->second.empty())
            raise(ErrorCode::NoCandidates, "bound variable has no grounded object");
          geom::PointCloud cloud = owned_points(obs, it->second);
          if (cloud.empty())
            raise(ErrorCode::NoCandidates, "bound object '" + it->second + "' not observed");
          return GroundedRef{cloud, it->second};
        }
        raise(ErrorCode::Internal, "direction reference cannot be grounded");
      };

      std::optional<GroundedRef> object_ref;
      std::optional<GroundedRef> target_ref;
      std::optional<dsl::Direction> direction;
      try {
        if (step.object) {
          if (const auto* dir = std::get_if<dsl::Direction>(&*step.object)) direction = *dir;
          else object_ref = resolve(*step.object, step.exclusion_steps);
        }
        if (step.target) {
          if (const auto* dir = std::get_if<dsl::Direction>(&*step.target)) direction = *dir;
          else target_ref = resolve(*step.target, {});
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoCandidates || e.code() == ErrorCode::UnknownPart ||
            e.code() == ErrorCode::EmptyResult) {
          record.failure_stage = FailureStage::Ground;
          return record;
        }
        throw;
      }

      // When moving a held object, its own cloud decides the placement height.
      if (step.primitive == dsl::Primitive::MoveGraspedObject && !object_ref &&
          scene.gripper.held) {
        geom::PointCloud held_cloud = owned_points(obs, *scene.gripper.held);
        if (!held_cloud.empty()) object_ref = GroundedRef{held_cloud, *scene.gripper.held};
      }

      geom::PointCloud robot_cloud = owned_points(obs, sim::kGripperOwner);
      geom::PointCloud labeled =
          ctrl::label_points(obs.cloud, object_ref ? &object_ref->cloud : nullptr,
                             target_ref ? &target_ref->cloud : nullptr, &robot_cloud);

      ctrl::ControlRequest request;
      request.primitive = step.primitive;
      if (object_ref) {
        request.object_cloud = object_ref->cloud;
        for (auto& p : request.object_cloud->points) p.label = geom::PointLabel::GoalObject;
      }
      if (target_ref) {
        request.target_cloud = target_ref->cloud;
        for (auto& p : request.target_cloud->points) p.label = geom::PointLabel::GoalTarget;
      }
      request.direction = direction;
      request.scene_cloud = labeled;
      request.gripper_pose = scene.gripper.pose;
      request.gripper_open = scene.gripper.open;

      ctrl::ControlResult motion = controller(request);

      for (std::size_t t = 0; t < motion.trajectory.size(); ++t) {
        if (record.steps_used >= config.max_steps) {
          record.failure_stage = FailureStage::Timeout;
          return record;
        }
        const codec::GripperAction& action = motion.trajectory[t];
        if (observer) {
          DemoFrame frame;
          frame.labeled_cloud = labeled;
          frame.action = action;
          frame.timestep = int(t) + 1;
          frame.stop = t + 1 == motion.trajectory.size();
          observer(frame);
        }
        sim::apply_waypoint(scene,
                            sim::GripperWaypoint{action.position, action.rotation_euler_deg,
                                                 action.open},
                            params.sim);
        ++record.steps_used;
        if (sim::evaluate_success(scene, spec.success, params.sim)) {
          record.success = true;
          return record;
        }
      }

      if (step.binds) {
        std::string owner;
        if (step.primitive == dsl::Primitive::Grasp && scene.gripper.held)
          owner = *scene.gripper.held;
        else if (object_ref)
          owner = object_ref->owner;
        binding_owner[int(step_index)] = owner;
      }
    }
  } catch (const std::exception&) {
    // Simulator, controller, or transport failures end the episode.
    record.failure_stage = FailureStage::Control;
    return record;
  }

  record.failure_stage = FailureStage::Control;  // plan exhausted without success
  return record;
}

// --- suite -------------------------------------------------------------------

RunReport run_suite(const std::vector<sim::TaskSpec>& tasks, const SuiteOptions& options,
                    const HarnessParams& params) {
  if (options.seeds < 1 || options.episodes_per < 1 || options.max_steps < 1)
    raise(ErrorCode::InvalidArgument, "run_suite: counts must be >= 1");

  std::vector<const sim::TaskSpec*> selected;
  for (const sim::TaskSpec& task : tasks) {
    if (options.levels.empty() ||
        std::find(options.levels.begin(), options.levels.end(), task.level) !=
            options.levels.end())
      selected.push_back(&task);
  }

  struct Job {
    const sim::TaskSpec* task;
    EpisodeConfig config;
  };
  std::vector<Job> jobs;
  for (const sim::TaskSpec* task : selected) {
    for (int seed = 0; seed < options.seeds; ++seed) {
      for (int episode = 0; episode < options.episodes_per; ++episode) {
        EpisodeConfig cfg;
        cfg.task_id = task->task_id;
        cfg.variation = task->variation;
        cfg.seed = std::uint64_t(seed);
        cfg.episode_index = episode;
        cfg.max_steps = options.max_steps;
        jobs.push_back(Job{task, cfg});
      }
    }
  }

  RunReport report;
  report.seeds = options.seeds;
  report.episodes_per_variation = options.episodes_per;
  report.max_steps = options.max_steps;
  report.episodes.resize(jobs.size());

  int workers = std::max(1, options.jobs);
  std::mutex queue_mutex;
  std::size_t next = 0;
  auto worker = [&]() {
    while (true) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(queue_mutex);
        if (next >= jobs.size()) return;
        index = next++;
      }
      const Job& job = jobs[index];
      std::string plan = options.plan_override ? *options.plan_override : job.task->oracle_plan;
      try {
        report.episodes[index] = run_episode(*job.task, job.config, plan, params);
      } catch (const std::exception&) {
        // A broken task or environment fails its episode, never the suite.
        report.episodes[index].config = job.config;
        report.episodes[index].level = job.task->level;
        report.episodes[index].success = false;
        report.episodes[index].failure_stage = FailureStage::Control;
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::sort(report.episodes.begin(), report.episodes.end(),
            [](const EpisodeRecord& a, const EpisodeRecord& b) {
              return std::tie(a.config.task_id, a.config.variation, a.config.seed,
                              a.config.episode_index) <
                     std::tie(b.config.task_id, b.config.variation, b.config.seed,
                              b.config.episode_index);
            });
  aggregate_report(report);
  return report;
}

void aggregate_report(RunReport& report) {
  report.per_variation.clear();
  report.per_level.clear();

  std::map<std::pair<std::string, int>, std::pair<int, int>> variation_counts;  // success, total
  std::map<std::pair<std::string, int>, int> variation_level;
  // per (level, seed): success, total
  std::map<int, std::map<std::uint64_t, std::pair<int, int>>> level_seed_counts;

  for (const EpisodeRecord& record : report.episodes) {
    auto key = std::make_pair(record.config.task_id, record.config.variation);
    auto& vc = variation_counts[key];
    vc.first += record.success ? 1 : 0;
    vc.second += 1;
    variation_level[key] = record.level;
    auto& lc = level_seed_counts[record.level][record.config.seed];
    lc.first += record.success ? 1 : 0;
    lc.second += 1;
  }

  for (const auto& [key, counts] : variation_counts) {
    VariationSummary summary;
    summary.task_id = key.first;
    summary.variation = key.second;
    summary.level = variation_level[key];
    summary.episodes = counts.second;
    summary.sr = round1(100.0 * counts.first / counts.second);
    report.per_variation.push_back(summary);
  }

  for (const auto& [level, seed_counts] : level_seed_counts) {
    std::vector<double> seed_srs;
    for (const auto& [seed, counts] : seed_counts)
      seed_srs.push_back(100.0 * counts.first / counts.second);
    double mean = 0.0;
    for (double sr : seed_srs) mean += sr;
    mean /= double(seed_srs.size());
    double variance = 0.0;
    for (double sr : seed_srs) variance += (sr - mean) * (sr - mean);
    variance /= double(seed_srs.size());  // population std across seeds
    LevelSummary summary;
    summary.level = level;
    summary.sr_mean = round1(mean);
    summary.sr_std = round1(std::sqrt(variance));
    report.per_level.push_back(summary);
  }
}

std::string report_to_json(const RunReport& report) {
  ordered_json j;
  j["meta"] = {{"seeds", report.seeds},
               {"episodes_per_variation", report.episodes_per_variation},
               {"max_steps", report.max_steps}};
  ordered_json episodes = ordered_json::array();
  for (const EpisodeRecord& record : report.episodes) {
    ordered_json e;
    e["task_id"] = record.config.task_id;
    e["variation"] = record.config.variation;
    e["level"] = record.level;
    e["seed"] = record.config.seed;
    e["episode"] = record.config.episode_index;
    e["success"] = record.success;
    e["steps_used"] = record.steps_used;
    e["failure_stage"] = record.success ? "none" : failure_stage_name(record.failure_stage);
    episodes.push_back(e);
  }
  j["episodes"] = episodes;
  ordered_json per_variation = ordered_json::array();
  for (const VariationSummary& v : report.per_variation)
    per_variation.push_back({{"task_id", v.task_id},
                             {"variation", v.variation},
                             {"level", v.level},
                             {"episodes", v.episodes},
                             {"sr", v.sr}});
  ordered_json per_level = ordered_json::object();
  for (const LevelSummary& l : report.per_level)
    per_level[std::to_string(l.level)] = {{"sr_mean", l.sr_mean}, {"sr_std", l.sr_std}};
  j["summary"] = {{"per_variation", per_variation}, {"per_level", per_level}};
  return j.dump(2) + "\n";
}

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "task_id,variation,level,episodes,sr\n";
  char buf[32];
  for (const VariationSummary& v : report.per_variation) {
    std::snprintf(buf, sizeof(buf), "%.1f", v.sr);
    out << v.task_id << "," << v.variation << "," << v.level << "," << v.episodes << "," << buf
        << "\n";
  }
  for (const LevelSummary& l : report.per_level) {
    char mean[32], sd[32];
    std::snprintf(mean, sizeof(mean), "%.1f", l.sr_mean);
    std::snprintf(sd, sizeof(sd), "%.1f", l.sr_std);
    out << "level_" << l.level << ",,,," << mean << "±" << sd << "\n";
  }
  return out.str();
}

// --- demos -------------------------------------------------------------------

namespace {

ordered_json action_json(const codec::GripperAction& action) {
  return ordered_json{
      {"position", {action.position.x(), action.position.y(), action.position.z()}},
      {"rotation_euler_deg",
       {action.rotation_euler_deg.x(), action.rotation_euler_deg.y(),
        action.rotation_euler_deg.z()}},
      {"open", action.open}};
}

ordered_json sparse_heatmap_json(const codec::PositionHeatmap& heatmap,
                                 const codec::PositionBinning& binning) {
  const char* names[3] = {"x", "y", "z"};
  ordered_json entries = ordered_json::array();
  for (Eigen::Index i = 0; i < heatmap.probs.rows(); ++i)
    for (Eigen::Index j = 0; j < heatmap.probs.cols(); ++j)
      if (heatmap.probs(i, j) > 0.0)
        entries.push_back(ordered_json::array({i, j, heatmap.probs(i, j)}));
  return ordered_json{{"axis", names[int(heatmap.axis)]},
                      {"m", binning.half_count},
                      {"b", binning.bin_size},
                      {"degenerate", heatmap.degenerate},
                      {"nonzero", entries}};
}

}  // namespace

void export_demos(const sim::TaskSpec& spec, const std::vector<std::uint64_t>& seeds,
                  const std::filesystem::path& out_dir, const HarnessParams& params) {
  namespace fs = std::filesystem;
  std::string task_dir = spec.task_id + "_v" + std::to_string(spec.variation);

  for (std::uint64_t seed : seeds) {
    std::vector<DemoFrame> frames;
    EpisodeConfig cfg;
    cfg.task_id = spec.task_id;
    cfg.variation = spec.variation;
    cfg.seed = seed;
    cfg.episode_index = 0;
    EpisodeRecord record = run_episode(spec, cfg, spec.oracle_plan, params,
                                       [&frames](const DemoFrame& f) { frames.push_back(f); });
    if (!record.success)
      raise(ErrorCode::OracleFailure, "export_demos: oracle plan failed on seed " +
                                          std::to_string(seed) + " (stage " +
                                          failure_stage_name(record.failure_stage) + ")");

    // Render every file in memory first so a failure leaves nothing behind.
    std::vector<std::pair<std::string, std::string>> files;
    for (std::size_t k = 0; k < frames.size(); ++k) {
      const DemoFrame& frame = frames[k];
      char frame_dir[32];
      std::snprintf(frame_dir, sizeof(frame_dir), "frame_%03zu", k);
      geom::PointCloud cloud = geom::voxel_downsample(frame.labeled_cloud, params.demo_voxel_size);
      files.emplace_back(std::string(frame_dir) + "/cloud.ply", io::ply_to_string(cloud));
      files.emplace_back(std::string(frame_dir) + "/action.json",
                         action_json(frame.action).dump(2) + "\n");

      ordered_json targets;
      targets["timestep"] = frame.timestep;
      targets["stop"] = frame.stop;
      targets["open"] = frame.action.open;
      ordered_json rot = ordered_json::array();
      for (int axis = 0; axis < 3; ++axis)
        rot.push_back(codec::encode_rotation(frame.action.rotation_euler_deg[axis],
                                             params.rotation_binning));
      targets["rotation_bins"] = rot;
      ordered_json heatmaps = ordered_json::array();
      for (int axis = 0; axis < 3; ++axis) {
        codec::PositionHeatmap heatmap = codec::groundtruth_position_heatmap(
            cloud, frame.action.position, params.binning, codec::Axis(axis));
        heatmaps.push_back(sparse_heatmap_json(heatmap, params.binning));
      }
      targets["position_heatmaps"] = heatmaps;
      files.emplace_back(std::string(frame_dir) + "/targets.json", targets.dump(2) + "\n");
    }

    fs::path seed_dir = out_dir / task_dir / ("seed_" + std::to_string(seed));
    fs::path tmp_dir = out_dir / task_dir / ("seed_" + std::to_string(seed) + ".tmp");
    fs::remove_all(tmp_dir);
    for (const auto& [rel, bytes] : files) io::write_file(tmp_dir / rel, bytes);
    fs::remove_all(seed_dir);
    fs::rename(tmp_dir, seed_dir);
  }
}

}  // namespace manip::eval
