#include "manip/codec.hpp"

#include <cmath>

namespace manip::codec {

void GripperAction::normalize_rotation() {
  for (int k = 0; k < 3; ++k) rotation_euler_deg[k] = wrap_degrees(rotation_euler_deg[k]);
}

void PositionBinning::check() const {
  if (half_count <= 0) raise(ErrorCode::InvalidArgument, "position binning: m must be positive");
  if (bin_size <= 0.0) raise(ErrorCode::InvalidArgument, "position binning: bin size must be > 0");
  if (!(eps2 < d2_max)) raise(ErrorCode::InvalidArgument, "position binning: eps2 must be < d2_max");
}

void RotationBinning::check() const {
  if (n_bins <= 0 || width_deg <= 0.0)
    raise(ErrorCode::InvalidArgument, "rotation binning: bins and width must be positive");
  if (std::abs(double(n_bins) * width_deg - 360.0) > 1e-9)
    raise(ErrorCode::InvalidArgument, "rotation binning: n_bins * width must equal 360");
}

Eigen::MatrixXd position_bin_centers(const geom::PointCloud& cloud, const PositionBinning& binning,
                                     Axis axis) {
  binning.check();
  if (cloud.empty()) raise(ErrorCode::EmptyCloud, "position_bin_centers: empty cloud");
  const int m = binning.half_count;
  const int cols = binning.bins_per_point();
  Eigen::MatrixXd centers(cloud.size(), cols);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double base = cloud.points[i].position[int(axis)];
    for (int j = 0; j < cols; ++j) centers(Eigen::Index(i), j) = base + binning.bin_size * (j - m);
  }
  return centers;
}

PositionHeatmap groundtruth_position_heatmap(const geom::PointCloud& cloud, const Vec3& target,
                                             const PositionBinning& binning, Axis axis) {
  PositionHeatmap heatmap;
  heatmap.axis = axis;
  heatmap.bin_positions = position_bin_centers(cloud, binning, axis);
  const double target_k = target[int(axis)];

  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(heatmap.bin_positions.rows(),
                                                 heatmap.bin_positions.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    if (cloud.points[std::size_t(i)].label == geom::PointLabel::Robot) continue;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      double diff = heatmap.bin_positions(i, j) - target_k;
      double d2 = diff * diff;
      if (d2 > binning.d2_max) continue;
      scores(i, j) = 1.0 / std::max(d2, binning.eps2);
    }
  }
  double total = scores.sum();
  if (total <= 0.0) {
    heatmap.degenerate = true;
    raise(ErrorCode::DegenerateHeatmap, "groundtruth_position_heatmap: all bin scores are zero");
  }
  heatmap.probs = scores / total;
  return heatmap;
}

double decode_axis(const PositionHeatmap& heatmap) {
  if (heatmap.degenerate || heatmap.probs.size() == 0)
    raise(ErrorCode::DegenerateHeatmap, "decode_position: degenerate heatmap");
  Eigen::Index best_i = 0, best_j = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < heatmap.probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < heatmap.probs.cols(); ++j) {
      if (heatmap.probs(i, j) > best) {  // strict: lowest (i, j) wins ties
        best = heatmap.probs(i, j);
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best <= 0.0) raise(ErrorCode::DegenerateHeatmap, "decode_position: all-zero heatmap");
  return heatmap.bin_positions(best_i, best_j);
}

Vec3 decode_position(const PositionHeatmap& x, const PositionHeatmap& y, const PositionHeatmap& z) {
  return Vec3(decode_axis(x), decode_axis(y), decode_axis(z));
}

int encode_rotation(double angle_deg, const RotationBinning& binning) {
  binning.check();
  double angle = wrap_degrees(angle_deg);
  int k = int(std::floor(angle / binning.width_deg));
  double lower_dist = angle - double(k) * binning.width_deg;
  double upper_dist = double(k + 1) * binning.width_deg - angle;
  int lower = k % binning.n_bins;
  int upper = (k + 1) % binning.n_bins;
  if (lower_dist < upper_dist) return lower;
  if (upper_dist < lower_dist) return upper;
  return std::min(lower, upper);
}

double decode_rotation(int index, const RotationBinning& binning) {
  binning.check();
  if (index < 0 || index >= binning.n_bins)
    raise(ErrorCode::IndexOutOfRange, "decode_rotation: bin index out of range");
  return double(index) * binning.width_deg;
}

std::vector<int> label_feature_ids(const geom::PointCloud& cloud) {
  std::vector<int> ids;
  ids.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& label = cloud.points[i].label;
    if (!label)
      raise(ErrorCode::UnlabeledPoint, "label_feature_ids: point " + std::to_string(i) + " unlabeled");
    ids.push_back(int(*label));
  }
  return ids;
}

TrajectoryTarget trajectory_targets(const std::vector<GripperAction>& actions, int max_length) {
  if (actions.empty()) raise(ErrorCode::EmptyTrajectory, "trajectory_targets: no actions");
  if (int(actions.size()) > max_length)
    raise(ErrorCode::TooLong, "trajectory_targets: " + std::to_string(actions.size()) +
                                  " actions exceed max length " + std::to_string(max_length));
  TrajectoryTarget target;
  target.steps.reserve(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    target.steps.push_back(TrajectoryStep{actions[i], int(i) + 1, i + 1 == actions.size()});
  }
  return target;
}

}  // namespace manip::codec
