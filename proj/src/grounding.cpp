#include "manip/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "manip/io.hpp"

namespace manip::ground {

double cloud_distance(const geom::PointCloud& a, const geom::PointCloud& b) {
  if (a.empty() || b.empty()) raise(ErrorCode::EmptyCloud, "cloud_distance: empty cloud");
  double best = std::numeric_limits<double>::max();
  for (const auto& pa : a.points) {
    for (const auto& pb : b.points) {
      best = std::min(best, (pa.position - pb.position).squaredNorm());
      if (best == 0.0) return 0.0;
    }
  }
  return std::sqrt(best);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double cosine_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

}  // namespace

std::vector<Instance> merge_detections(const std::vector<Detection>& detections,
                                       const MergeThresholds& thresholds) {
  const int n = int(detections.size());
  for (const Detection& det : detections) {
    if (det.cloud.empty()) raise(ErrorCode::InvalidArgument, "merge_detections: empty detection cloud");
    if (std::abs(det.embedding.norm() - 1.0) > 1e-6)
      raise(ErrorCode::InvalidArgument, "merge_detections: embedding not unit norm");
  }

  UnionFind components(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (cosine_distance(detections[i].embedding, detections[j].embedding) > thresholds.tau_sem)
        continue;
      if (cloud_distance(detections[i].cloud, detections[j].cloud) > thresholds.tau_geo) continue;
      components.unite(i, j);
    }
  }

  // Group members; component order follows the lowest member index.
  std::vector<std::vector<int>> groups;
  std::vector<int> root_to_group(std::max(n, 1), -1);
  for (int i = 0; i < n; ++i) {
    int root = components.find(i);
    if (root_to_group[root] < 0) {
      root_to_group[root] = int(groups.size());
      groups.emplace_back();
    }
    groups[root_to_group[root]].push_back(i);
  }

  std::vector<Instance> instances;
  instances.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Instance inst;
    inst.instance_id = int(g);
    inst.members = groups[g];
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(detections[groups[g][0]].embedding.size());
    for (int m : groups[g]) {
      inst.cloud.append(detections[m].cloud);
      mean += detections[m].embedding;
    }
    mean /= double(groups[g].size());
    double norm = mean.norm();
    inst.embedding = norm > 1e-12 ? Eigen::VectorXd(mean / norm) : mean;
    instances.push_back(std::move(inst));
  }
  return instances;
}

const Instance& ground_text(const std::vector<Instance>& instances,
                            const Eigen::VectorXd& query_embedding,
                            const std::vector<int>& exclusions, double min_similarity) {
  const Instance* best = nullptr;
  double best_sim = -2.0;
  double qn = query_embedding.norm();
  if (qn < 1e-12) raise(ErrorCode::InvalidArgument, "ground_text: zero query embedding");
  for (const Instance& inst : instances) {
    if (std::find(exclusions.begin(), exclusions.end(), inst.instance_id) != exclusions.end())
      continue;
    double en = inst.embedding.norm();
    double sim = en < 1e-12 ? -1.0 : query_embedding.dot(inst.embedding) / (qn * en);
    if (sim > best_sim) {  // strict: lowest instance_id wins ties
      best_sim = sim;
      best = &inst;
    }
  }
  if (!best) raise(ErrorCode::NoCandidates, "ground_text: no non-excluded instance");
  if (best_sim < min_similarity)
    raise(ErrorCode::NoCandidates, "ground_text: best similarity " + std::to_string(best_sim) +
                                       " below threshold " + std::to_string(min_similarity));
  return *best;
}

namespace {

double level_fraction(PartLevel level) {
  switch (level) {
    case PartLevel::Bottom: return 0.0;
    case PartLevel::BottomMiddle: return 0.25;
    case PartLevel::Middle: return 0.5;
    case PartLevel::TopMiddle: return 0.75;
    case PartLevel::Top: return 1.0;
  }
  return 0.0;
}

double quantize_um(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

PartQuery parse_part(const std::string& text) {
  std::string s;
  for (char c : text) s.push_back(char(std::tolower(static_cast<unsigned char>(c))));

  PartKind kind;
  if (s.find("drawer") != std::string::npos) kind = PartKind::DrawerHandle;
  else if (s.find("shelf") != std::string::npos) kind = PartKind::Shelf;
  else raise(ErrorCode::UnknownPart, "parse_part: no drawer handle or shelf in '" + text + "'");

  PartLevel level;
  if (s.find("bottom middle") != std::string::npos || s.find("bottom-middle") != std::string::npos)
    level = PartLevel::BottomMiddle;
  else if (s.find("top middle") != std::string::npos || s.find("top-middle") != std::string::npos)
    level = PartLevel::TopMiddle;
  else if (s.find("bottom") != std::string::npos) level = PartLevel::Bottom;
  else if (s.find("top") != std::string::npos) level = PartLevel::Top;
  else if (s.find("middle") != std::string::npos) level = PartLevel::Middle;
  else raise(ErrorCode::UnknownPart, "parse_part: no level word in '" + text + "'");

  return PartQuery{level, kind};
}

std::pair<double, double> part_height_range(const PartQuery& part, double total_height) {
  if (!(total_height > 0.0))
    raise(ErrorCode::InvalidArgument, "part_height_range: total height must be positive");
  const double f = level_fraction(part.level);
  double low, high;
  if (part.kind == PartKind::DrawerHandle) {
    // Equal slabs of H/4; the lowest slab is base clearance, levels sweep the
    // remaining three: bottom [H/4, H/2] ... top [3H/4, H].
    low = total_height * (0.25 + 0.5 * f);
    high = total_height * (0.5 + 0.5 * f);
  } else {
    // Shelf band of height H/5 whose floor sweeps [0, 3H/5].
    low = total_height * (0.6 * f);
    high = total_height * (0.6 * f + 0.2);
  }
  return {quantize_um(low), quantize_um(high)};
}

std::pair<double, double> part_height_range(const std::string& part_text, double total_height) {
  return part_height_range(parse_part(part_text), total_height);
}

geom::PointCloud filter_by_height(const Instance& instance, double low, double high,
                                  double table_height) {
  if (!(low < high)) raise(ErrorCode::InvalidArgument, "filter_by_height: low must be < high");
  geom::PointCloud out;
  for (const geom::Point& p : instance.cloud.points) {
    double h = p.position.z() - table_height;
    if (h >= low && h <= high) out.points.push_back(p);
  }
  if (out.empty()) raise(ErrorCode::EmptyResult, "filter_by_height: no points in band");
  return out;
}

Eigen::VectorXd embed_text(const std::string& text, int dim) {
  Rng rng(fnv1a(text));
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.gaussian();
  double n = v.norm();
  if (n < 1e-12) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / n;
}

Eigen::VectorXd embed_detection(const std::string& text, std::uint64_t noise_seed,
                                double noise_sigma, int dim) {
  Eigen::VectorXd v = embed_text(text, dim);
  Rng rng(noise_seed);
  for (int i = 0; i < dim; ++i) v[i] += noise_sigma * rng.gaussian();
  return v / v.norm();
}

std::vector<Detection> load_detections(const std::filesystem::path& json_path) {
  auto j = nlohmann::json::parse(io::read_file(json_path));
  if (!j.is_array()) raise(ErrorCode::Io, "detections: expected a JSON array");
  std::vector<Detection> out;
  for (const auto& item : j) {
    Detection det;
    det.view_id = item.at("view_id").get<std::string>();
    auto bbox = item.at("bbox").get<std::vector<double>>();
    if (bbox.size() != 4) raise(ErrorCode::Io, "detections: bbox must have 4 entries");
    std::copy(bbox.begin(), bbox.end(), det.bbox.begin());
    auto emb = item.at("embedding").get<std::vector<double>>();
    det.embedding = Eigen::Map<Eigen::VectorXd>(emb.data(), Eigen::Index(emb.size()));
    det.cloud = io::load_ply(json_path.parent_path() / item.at("cloud_path").get<std::string>());
    out.push_back(std::move(det));
  }
  return out;
}

void save_detections(const std::vector<Detection>& detections,
                     const std::filesystem::path& json_path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i];
    std::string cloud_name = "det_" + std::to_string(i) + ".ply";
    io::save_ply(det.cloud, json_path.parent_path() / cloud_name);
    nlohmann::ordered_json item;
    item["view_id"] = det.view_id;
    item["bbox"] = det.bbox;
    item["embedding"] = std::vector<double>(det.embedding.data(),
                                            det.embedding.data() + det.embedding.size());
    item["cloud_path"] = cloud_name;
    arr.push_back(item);
  }
  io::write_file(json_path, arr.dump(2) + "\n");
}

Eigen::VectorXd load_query_embedding(const std::filesystem::path& json_path) {
  auto j = nlohmann::json::parse(io::read_file(json_path));
  auto emb = j.at("embedding").get<std::vector<double>>();
  if (emb.empty()) raise(ErrorCode::Io, "query embedding: empty vector");
  return Eigen::Map<Eigen::VectorXd>(emb.data(), Eigen::Index(emb.size()));
}

}  // namespace manip::ground
