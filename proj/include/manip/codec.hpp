#pragma once

#include <Eigen/Dense>

#include <vector>

#include "manip/geometry.hpp"

namespace manip::codec {

/// One waypoint: gripper position, Euler rotation (degrees in [0,360)),
/// and open state.
struct GripperAction {
  Vec3 position = Vec3::Zero();
  Vec3 rotation_euler_deg = Vec3::Zero();
  bool open = true;

  /// Wrap rotation components into [0, 360).
  void normalize_rotation();
};

enum class Axis : int { X = 0, Y = 1, Z = 2 };

/// Per-point position bin lattice: 2m bins of size b per point per axis.
struct PositionBinning {
  int half_count = 15;    // m
  double bin_size = 0.01; // b, meters
  double d2_max = 0.01;   // squared-distance cutoff, m^2
  double eps2 = 1e-8;     // squared-distance clamp, m^2

  int bins_per_point() const { return 2 * half_count; }
  void check() const;
};

struct RotationBinning {
  int n_bins = 72;
  double width_deg = 5.0;

  void check() const;
};

struct PositionHeatmap {
  Axis axis = Axis::X;
  Eigen::MatrixXd bin_positions;  // n x 2m, meters
  Eigen::MatrixXd probs;          // n x 2m, L1-normalized
  bool degenerate = false;
};

struct TrajectoryStep {
  GripperAction action;
  int timestep = 1;  // 1-based index within the trajectory
  bool stop = false;
};

struct TrajectoryTarget {
  std::vector<TrajectoryStep> steps;
};

/// Bin centers: entry (i, j) = point_i[axis] + b * (j - m), j in 0..2m-1.
Eigen::MatrixXd position_bin_centers(const geom::PointCloud& cloud, const PositionBinning& binning,
                                     Axis axis);

/// Ground-truth heatmap: score 0 for bins beyond the cutoff or on Robot
/// points, else inverse squared distance (clamped below by eps2), then
/// L1-normalized. Throws DegenerateHeatmap when every score is zero.
PositionHeatmap groundtruth_position_heatmap(const geom::PointCloud& cloud, const Vec3& target,
                                             const PositionBinning& binning, Axis axis);

/// Highest-probability bin center per axis; ties by lowest (point, bin) index.
Vec3 decode_position(const PositionHeatmap& x, const PositionHeatmap& y, const PositionHeatmap& z);
double decode_axis(const PositionHeatmap& heatmap);

/// Nearest bin center under circular distance; ties to the lower index.
/// Total on all finite angles (input is wrapped mod 360 first).
int encode_rotation(double angle_deg, const RotationBinning& binning);
double decode_rotation(int index, const RotationBinning& binning);

/// Stable label ids: GoalObject 0, GoalTarget 1, Robot 2, Obstacle 3.
std::vector<int> label_feature_ids(const geom::PointCloud& cloud);

/// Timestep-indexed trajectory with a stop flag on the final step only.
TrajectoryTarget trajectory_targets(const std::vector<GripperAction>& actions, int max_length = 5);

}  // namespace manip::codec
