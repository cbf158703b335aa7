#include "manip/geometry.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace manip::geom {

Vec3 PointCloud::centroid() const {
  if (points.empty()) return Vec3::Zero();
  Vec3 sum = Vec3::Zero();
  for (const auto& p : points) sum += p.position;
  return sum / double(points.size());
}

Aabb PointCloud::bounds() const {
  Aabb box;
  box.min = Vec3::Constant(std::numeric_limits<double>::max());
  box.max = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p.position);
    box.max = box.max.cwiseMax(p.position);
  }
  return box;
}

void CameraView::check() const {
  if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0)
    raise(ErrorCode::SingularIntrinsics, "view '" + view_id + "': non-positive focal length");
  if (std::abs(intrinsics.determinant()) < 1e-12)
    raise(ErrorCode::SingularIntrinsics, "view '" + view_id + "': singular intrinsics");
  Mat3 r = extrinsics.rotation.toRotationMatrix();
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    raise(ErrorCode::InvalidArgument, "view '" + view_id + "': rotation not orthonormal");
  if (!rgb.valid() || !depth.valid())
    raise(ErrorCode::InvalidArgument, "view '" + view_id + "': bad image buffers");
  if (rgb.width != depth.width || rgb.height != depth.height)
    raise(ErrorCode::InvalidArgument, "view '" + view_id + "': rgb/depth size mismatch");
}

PointCloud fuse_views(std::span<const CameraView> views) {
  if (views.empty()) raise(ErrorCode::EmptyInput, "fuse_views: no views");
  PointCloud out;
  for (const CameraView& view : views) {
    view.check();
    const Mat3 k_inv = view.intrinsics.inverse();
    for (int v = 0; v < view.depth.height; ++v) {
      for (int u = 0; u < view.depth.width; ++u) {
        double d = view.depth.depth[std::size_t(v) * view.depth.width + u];
        if (!(d > 0.0) || !std::isfinite(d)) continue;
        Vec3 ray = k_inv * Vec3(double(u), double(v), 1.0);
        Vec3 cam = ray * (d / ray.z());
        Point p;
        p.position = view.extrinsics.apply(cam);
        std::size_t idx = (std::size_t(v) * view.rgb.width + u) * 3;
        p.color = {view.rgb.rgb[idx], view.rgb.rgb[idx + 1], view.rgb.rgb[idx + 2]};
        out.points.push_back(p);
      }
    }
  }
  return out;
}

Vec3 project_to_view(const CameraView& view, const Vec3& world_point) {
  Vec3 cam = view.extrinsics.apply_inverse(world_point);
  Vec3 pix = view.intrinsics * cam;
  return Vec3(pix.x() / cam.z(), pix.y() / cam.z(), cam.z());
}

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= std::uint64_t(v);
      h *= 0x100000001b3ull;
    }
    return std::size_t(h);
  }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (voxel_size <= 0.0) raise(ErrorCode::InvalidArgument, "voxel_downsample: voxel size must be > 0");
  struct Best {
    std::size_t index;
    double dist2;
  };
  std::unordered_map<VoxelKey, Best, VoxelKeyHash> best;
  best.reserve(cloud.size());
  std::vector<VoxelKey> order;  // first-seen voxel order keeps output deterministic
  order.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i].position;
    VoxelKey key{std::int64_t(std::floor(p.x() / voxel_size)),
                 std::int64_t(std::floor(p.y() / voxel_size)),
                 std::int64_t(std::floor(p.z() / voxel_size))};
    Vec3 centroid((double(key.x) + 0.5) * voxel_size, (double(key.y) + 0.5) * voxel_size,
                  (double(key.z) + 0.5) * voxel_size);
    double d2 = (p - centroid).squaredNorm();
    auto [it, inserted] = best.try_emplace(key, Best{i, d2});
    if (inserted) {
      order.push_back(key);
    } else if (d2 < it->second.dist2) {
      it->second = Best{i, d2};
    }
  }
  PointCloud out;
  out.points.reserve(order.size());
  for (const VoxelKey& key : order) out.points.push_back(cloud.points[best.at(key).index]);
  return out;
}

PointCloud crop_workspace(const PointCloud& cloud, const Workspace& ws, double table_cut_eps) {
  PointCloud out;
  for (const Point& p : cloud.points) {
    if (ws.aabb.contains(p.position) && p.position.z() > ws.table_height + table_cut_eps)
      out.points.push_back(p);
  }
  return out;
}

PointCloud remove_arm_points(const PointCloud& cloud, std::span<const ArmLinkBox> links,
                             PointCloud* removed) {
  std::vector<Obb> boxes;
  boxes.reserve(links.size());
  for (const ArmLinkBox& link : links) boxes.push_back(link.world_obb());
  PointCloud out;
  for (const Point& p : cloud.points) {
    bool inside = false;
    for (const Obb& box : boxes) {
      if (box.contains(p.position)) {
        inside = true;
        break;
      }
    }
    if (inside) {
      if (removed) removed->points.push_back(p);
    } else {
      out.points.push_back(p);
    }
  }
  return out;
}

PointCloud annotate_heights(const PointCloud& cloud, double table_height) {
  PointCloud out = cloud;
  for (Point& p : out.points) p.height = p.position.z() - table_height;
  return out;
}

}  // namespace manip::geom
