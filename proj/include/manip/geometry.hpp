#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "manip/math.hpp"

namespace manip::geom {

/// Role of a point for the motion controller's labeled-feature path.
enum class PointLabel : std::uint8_t {
  GoalObject = 0,
  GoalTarget = 1,
  Robot = 2,
  Obstacle = 3,
};

struct Point {
  Vec3 position = Vec3::Zero();
  std::array<std::uint8_t, 3> color{0, 0, 0};
  double height = 0.0;
  std::optional<PointLabel> label;
};

struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Vec3 centroid() const;
  Aabb bounds() const;
  void append(const PointCloud& other) {
    points.insert(points.end(), other.points.begin(), other.points.end());
  }
};

struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // H*W*3, row major

  bool valid() const { return width > 0 && height > 0 && rgb.size() == std::size_t(width) * height * 3; }
};

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // meters, 0 = invalid

  bool valid() const { return width > 0 && height > 0 && depth.size() == std::size_t(width) * height; }
};

struct CameraView {
  std::string view_id;
  Mat3 intrinsics = Mat3::Identity();  // pixels
  Pose extrinsics;                     // camera -> world
  Image8 rgb;
  DepthImage depth;

  void check() const;  // throws InvalidArgument on a broken view
};

struct Workspace {
  Aabb aabb;
  double table_height = 0.0;
};

struct ArmLinkBox {
  std::string link_id;
  Obb local_obb;   // in link frame
  Pose link_pose;  // link -> world

  Obb world_obb() const { return local_obb.transformed(link_pose); }
};

struct PreprocessParams {
  double voxel_size = 0.01;      // meters
  double table_cut_eps = 0.002;  // strict cut above the table plane
};

/// Back-project every valid depth pixel of every view into a single
/// world-frame cloud. Colors are copied; heights stay unset.
PointCloud fuse_views(std::span<const CameraView> views);

/// Keep at most one point per voxel. The survivor is the input point nearest
/// the voxel centroid, ties broken by lowest input index, so the output is a
/// strict subset of the input.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

/// Keep points inside the workspace box (closed bounds) and strictly above
/// table_height + table_cut_eps.
PointCloud crop_workspace(const PointCloud& cloud, const Workspace& ws,
                          double table_cut_eps = 0.002);

/// Drop points inside any world-transformed link box. When `removed` is given
/// it receives the complement, so kept+removed partition the input.
PointCloud remove_arm_points(const PointCloud& cloud, std::span<const ArmLinkBox> links,
                             PointCloud* removed = nullptr);

/// Set every point's height to position.z - table_height.
PointCloud annotate_heights(const PointCloud& cloud, double table_height);

/// Project a world point into a view; returns (u, v, z_depth) in the camera.
Vec3 project_to_view(const CameraView& view, const Vec3& world_point);

}  // namespace manip::geom
