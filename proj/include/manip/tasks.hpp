#pragma once

#include <filesystem>
#include <vector>

#include "manip/sim.hpp"

namespace manip::tasks {

/// The bundled desk-scale task catalog: press, pick, push, screw, close,
/// open, and put/stack families plus an ordered-buttons long-horizon task.
std::vector<sim::TaskSpec> builtin_catalog();

/// Write the catalog as tasks/<task_id>/<variation>.json with an adjacent
/// <variation>.lp oracle plan.
void export_catalog(const std::vector<sim::TaskSpec>& tasks, const std::filesystem::path& dir);

/// Load every task under a catalog directory (sorted by task id, variation).
std::vector<sim::TaskSpec> load_catalog(const std::filesystem::path& dir);

}  // namespace manip::tasks
