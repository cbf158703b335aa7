#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

#include "manip/geometry.hpp"

namespace manip::ground {

/// One per-view detection: box, semantic embedding (unit norm), and the
/// segmented world-frame cloud.
struct Detection {
  std::string view_id;
  std::array<double, 4> bbox{0, 0, 0, 0};  // x, y, w, h in pixels
  Eigen::VectorXd embedding;
  geom::PointCloud cloud;
};

/// Merged object-centric representation.
struct Instance {
  int instance_id = 0;
  geom::PointCloud cloud;           // union of member clouds
  Eigen::VectorXd embedding;        // renormalized mean of member embeddings
  std::vector<int> members;         // indices into the detection list
};

struct MergeThresholds {
  double tau_sem = 0.3;   // cosine distance, in [0, 2]
  double tau_geo = 0.02;  // meters
};

/// Minimum Euclidean distance over all cross pairs.
double cloud_distance(const geom::PointCloud& a, const geom::PointCloud& b);

/// Link detections whose cosine distance <= tau_sem AND cloud distance
/// <= tau_geo; instances are the connected components of the link graph.
/// Instance ids follow the order of each component's lowest member index.
std::vector<Instance> merge_detections(const std::vector<Detection>& detections,
                                       const MergeThresholds& thresholds);

/// Non-excluded instance with the highest cosine similarity to the query.
/// Ties by lowest instance_id. When min_similarity >= -1 is given, a best
/// match below it raises NoCandidates (nothing in the scene matches).
const Instance& ground_text(const std::vector<Instance>& instances,
                            const Eigen::VectorXd& query_embedding,
                            const std::vector<int>& exclusions = {},
                            double min_similarity = -2.0);

enum class PartLevel { Bottom, BottomMiddle, Middle, TopMiddle, Top };
enum class PartKind { DrawerHandle, Shelf };

struct PartQuery {
  PartLevel level;
  PartKind kind;
};

/// Parse e.g. "bottom drawer handle" or "middle shelf"; throws UnknownPart.
PartQuery parse_part(const std::string& text);

/// Height band for a named level of an articulated unit of the given total
/// height. Drawer handles: the unit splits into equal slabs with the lowest
/// slab excluded as base clearance; shelves: a slab of height H/5 at the
/// level's station. Outputs are quantized to 1 um.
std::pair<double, double> part_height_range(const PartQuery& part, double total_height);
std::pair<double, double> part_height_range(const std::string& part_text, double total_height);

/// Sub-cloud with height above the table within [low, high] (closed).
geom::PointCloud filter_by_height(const Instance& instance, double low, double high,
                                  double table_height);

/// Deterministic fixture embedding for a text description; unit norm.
/// Stands in for the out-of-scope text encoder.
Eigen::VectorXd embed_text(const std::string& text, int dim = 32);

/// Fixture embedding with seeded perturbation, renormalized; stands in for a
/// per-view detector embedding of the described object.
Eigen::VectorXd embed_detection(const std::string& text, std::uint64_t noise_seed,
                                double noise_sigma, int dim = 32);

/// Detections file: JSON array of {view_id, bbox, embedding, cloud_path};
/// cloud paths resolved relative to the JSON file.
std::vector<Detection> load_detections(const std::filesystem::path& json_path);
void save_detections(const std::vector<Detection>& detections,
                     const std::filesystem::path& json_path);

/// Query embedding file: {text, embedding:[d]}.
Eigen::VectorXd load_query_embedding(const std::filesystem::path& json_path);

}  // namespace manip::ground
