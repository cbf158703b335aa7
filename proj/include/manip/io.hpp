#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "manip/geometry.hpp"

namespace manip::io {

struct PlyOptions {
  bool with_height = true;
  bool with_label = true;  // written only when every point carries a label
};

/// Binary little-endian PLY: x,y,z float32; red,green,blue uchar;
/// optional height float32; optional label uchar.
void save_ply(const geom::PointCloud& cloud, const std::filesystem::path& path,
              const PlyOptions& opts = {});
geom::PointCloud load_ply(const std::filesystem::path& path);

std::string ply_to_string(const geom::PointCloud& cloud, const PlyOptions& opts = {});
geom::PointCloud ply_from_string(const std::string& bytes);

/// 8-bit RGB PNG.
void save_png_rgb(const geom::Image8& img, const std::filesystem::path& path);
geom::Image8 load_png_rgb(const std::filesystem::path& path);

/// 16-bit grayscale PNG holding depth in millimeters.
void save_depth_png16(const geom::DepthImage& depth, const std::filesystem::path& path);
geom::DepthImage load_depth_png16(const std::filesystem::path& path);

/// Raw little-endian float32 meters, row major; dimensions come from the
/// camera-view JSON.
void save_depth_f32(const geom::DepthImage& depth, const std::filesystem::path& path);
geom::DepthImage load_depth_f32(const std::filesystem::path& path, int width, int height);

/// Camera view JSON: {view_id, intrinsics:[9 row-major], extrinsics:{position,
/// quaternion_wxyz}, rgb_path, depth_path, depth_encoding: "png_mm16"|"f32",
/// width, height}. Image paths are resolved relative to the JSON file.
geom::CameraView load_camera_view(const std::filesystem::path& json_path);
void save_camera_view(const geom::CameraView& view, const std::filesystem::path& json_path,
                      const std::string& depth_encoding = "png_mm16");

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

std::string base64_encode(const std::string& bytes);
std::string base64_decode(const std::string& text);

}  // namespace manip::io
