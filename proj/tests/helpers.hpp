#pragma once

#include <cmath>
#include <set>
#include <vector>

#include "manip/codec.hpp"
#include "manip/geometry.hpp"
#include "manip/grounding.hpp"

namespace testutil {

using manip::Rng;
using manip::Vec3;

inline manip::geom::PointCloud random_cloud(Rng& rng, std::size_t count, double extent = 0.5) {
  manip::geom::PointCloud cloud;
  for (std::size_t i = 0; i < count; ++i) {
    manip::geom::Point p;
    p.position = Vec3(rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                      rng.uniform(-extent, extent));
    p.color = {std::uint8_t(rng.uniform_int(0, 255)), std::uint8_t(rng.uniform_int(0, 255)),
               std::uint8_t(rng.uniform_int(0, 255))};
    cloud.points.push_back(p);
  }
  return cloud;
}

// Independent brute-force ground-truth heatmap: re-derives every bin score
// from the formula without touching the codec's matrix path.
struct BruteHeatmap {
  std::vector<std::vector<double>> centers;
  std::vector<std::vector<double>> probs;
  bool degenerate = false;
};

inline BruteHeatmap brute_force_heatmap(const manip::geom::PointCloud& cloud, double target_k,
                                        int m, double b, double d2_max, double eps2, int axis) {
  BruteHeatmap out;
  double total = 0.0;
  for (const auto& point : cloud.points) {
    std::vector<double> row_centers;
    std::vector<double> row_scores;
    for (int j = 0; j < 2 * m; ++j) {
      double center = point.position[axis] + b * double(j - m);
      row_centers.push_back(center);
      double d2 = (center - target_k) * (center - target_k);
      double score;
      if (d2 > d2_max || point.label == manip::geom::PointLabel::Robot) score = 0.0;
      else score = 1.0 / std::max(d2, eps2);
      row_scores.push_back(score);
      total += score;
    }
    out.centers.push_back(row_centers);
    out.probs.push_back(row_scores);
  }
  if (total <= 0.0) {
    out.degenerate = true;
    return out;
  }
  for (auto& row : out.probs)
    for (double& v : row) v /= total;
  return out;
}

// Brute-force transitive closure over the pairwise merge predicate.
inline std::set<std::set<int>> brute_force_components(
    const std::vector<manip::ground::Detection>& detections, double tau_sem, double tau_geo) {
  const int n = int(detections.size());
  std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    linked[i][i] = true;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double cos_dist = 1.0 - detections[i].embedding.dot(detections[j].embedding) /
                                  (detections[i].embedding.norm() * detections[j].embedding.norm());
      if (cos_dist > tau_sem) continue;
      double best = 1e300;
      for (const auto& pa : detections[i].cloud.points)
        for (const auto& pb : detections[j].cloud.points)
          best = std::min(best, (pa.position - pb.position).norm());
      if (best > tau_geo) continue;
      linked[i][j] = linked[j][i] = true;
    }
  }
  // Warshall closure.
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (linked[i][k] && linked[k][j]) linked[i][j] = true;
  std::set<std::set<int>> components;
  for (int i = 0; i < n; ++i) {
    std::set<int> component;
    for (int j = 0; j < n; ++j)
      if (linked[i][j]) component.insert(j);
    components.insert(component);
  }
  return components;
}

inline std::set<std::set<int>> instance_partition(
    const std::vector<manip::ground::Instance>& instances) {
  std::set<std::set<int>> partition;
  for (const auto& inst : instances) partition.insert({inst.members.begin(), inst.members.end()});
  return partition;
}

inline manip::ground::Detection make_detection(Rng& rng, const Eigen::VectorXd& embedding,
                                               const Vec3& center, std::size_t points = 5) {
  manip::ground::Detection det;
  det.view_id = "view" + std::to_string(rng.uniform_int(0, 3));
  det.embedding = embedding / embedding.norm();
  for (std::size_t i = 0; i < points; ++i) {
    manip::geom::Point p;
    p.position = center + Vec3(rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01),
                               rng.uniform(-0.01, 0.01));
    det.cloud.points.push_back(p);
  }
  return det;
}

inline Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
  return v / v.norm();
}

}  // namespace testutil
