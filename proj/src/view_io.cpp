#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include <nlohmann/json.hpp>

#include "manip/io.hpp"

namespace manip::io {

namespace {

using nlohmann::ordered_json;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  if (mode[0] == 'w' && path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) raise(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<png_bytep>& rows) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::Io, "png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    raise(ErrorCode::Io, "png: write failed for " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // buffers are little-endian in memory
  png_write_image(png, const_cast<png_bytep*>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> data;  // 16-bit data little-endian in memory
};

PngImage read_png(const std::filesystem::path& path, bool want_rgb) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::Io, "png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    raise(ErrorCode::Io, "png: read failed for " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  PngImage img;
  img.width = int(png_get_image_width(png, info));
  img.height = int(png_get_image_height(png, info));
  img.bit_depth = int(png_get_bit_depth(png, info));
  int color_type = png_get_color_type(png, info);

  if (want_rgb) {
    if (img.bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    img.bit_depth = 8;
    img.channels = 3;
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY || img.bit_depth != 16) {
      png_destroy_read_struct(&png, &info, nullptr);
      raise(ErrorCode::Io, "png: expected 16-bit grayscale depth image in " + path.string());
    }
    png_set_swap(png);
    img.channels = 1;
  }
  png_read_update_info(png, info);

  std::size_t row_bytes = png_get_rowbytes(png, info);
  img.data.resize(row_bytes * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.data.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace

void save_png_rgb(const geom::Image8& img, const std::filesystem::path& path) {
  if (!img.valid()) raise(ErrorCode::InvalidArgument, "save_png_rgb: invalid image");
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(img.rgb.data() + std::size_t(y) * img.width * 3);
  write_png(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

geom::Image8 load_png_rgb(const std::filesystem::path& path) {
  PngImage raw = read_png(path, true);
  geom::Image8 img;
  img.width = raw.width;
  img.height = raw.height;
  img.rgb = std::move(raw.data);
  img.rgb.resize(std::size_t(img.width) * img.height * 3);
  return img;
}

void save_depth_png16(const geom::DepthImage& depth, const std::filesystem::path& path) {
  if (!depth.valid()) raise(ErrorCode::InvalidArgument, "save_depth_png16: invalid image");
  std::vector<std::uint16_t> mm(depth.depth.size());
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    double v = depth.depth[i];
    double scaled = std::isfinite(v) && v > 0.0 ? std::round(v * 1000.0) : 0.0;
    mm[i] = std::uint16_t(std::min(scaled, 65535.0));
  }
  std::vector<png_bytep> rows(depth.height);
  for (int y = 0; y < depth.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(mm.data() + std::size_t(y) * depth.width);
  write_png(path, depth.width, depth.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

geom::DepthImage load_depth_png16(const std::filesystem::path& path) {
  PngImage raw = read_png(path, false);
  geom::DepthImage depth;
  depth.width = raw.width;
  depth.height = raw.height;
  depth.depth.resize(std::size_t(raw.width) * raw.height);
  const std::uint16_t* mm = reinterpret_cast<const std::uint16_t*>(raw.data.data());
  for (std::size_t i = 0; i < depth.depth.size(); ++i) depth.depth[i] = double(mm[i]) / 1000.0;
  return depth;
}

void save_depth_f32(const geom::DepthImage& depth, const std::filesystem::path& path) {
  if (!depth.valid()) raise(ErrorCode::InvalidArgument, "save_depth_f32: invalid image");
  std::string bytes(depth.depth.size() * 4, '\0');
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    float v = float(depth.depth[i]);
    std::memcpy(bytes.data() + i * 4, &v, 4);
  }
  write_file(path, bytes);
}

geom::DepthImage load_depth_f32(const std::filesystem::path& path, int width, int height) {
  std::string bytes = read_file(path);
  if (bytes.size() != std::size_t(width) * height * 4)
    raise(ErrorCode::Io, "depth f32: size mismatch in " + path.string());
  geom::DepthImage depth;
  depth.width = width;
  depth.height = height;
  depth.depth.resize(std::size_t(width) * height);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    float v;
    std::memcpy(&v, bytes.data() + i * 4, 4);
    depth.depth[i] = v;
  }
  return depth;
}

geom::CameraView load_camera_view(const std::filesystem::path& json_path) {
  ordered_json j = ordered_json::parse(read_file(json_path));
  geom::CameraView view;
  view.view_id = j.at("view_id").get<std::string>();
  auto k = j.at("intrinsics").get<std::vector<double>>();
  if (k.size() != 9) raise(ErrorCode::Io, "camera view: intrinsics must have 9 entries");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) view.intrinsics(r, c) = k[std::size_t(r) * 3 + c];
  const auto& ex = j.at("extrinsics");
  auto pos = ex.at("position").get<std::vector<double>>();
  auto q = ex.at("quaternion_wxyz").get<std::vector<double>>();
  if (pos.size() != 3 || q.size() != 4) raise(ErrorCode::Io, "camera view: bad extrinsics");
  view.extrinsics.position = Vec3(pos[0], pos[1], pos[2]);
  view.extrinsics.rotation = Quat(q[0], q[1], q[2], q[3]).normalized();

  auto dir = json_path.parent_path();
  view.rgb = load_png_rgb(dir / j.at("rgb_path").get<std::string>());
  std::string encoding = j.value("depth_encoding", "png_mm16");
  auto depth_path = dir / j.at("depth_path").get<std::string>();
  if (encoding == "png_mm16") {
    view.depth = load_depth_png16(depth_path);
  } else if (encoding == "f32") {
    view.depth = load_depth_f32(depth_path, j.at("width").get<int>(), j.at("height").get<int>());
  } else {
    raise(ErrorCode::Io, "camera view: unknown depth_encoding '" + encoding + "'");
  }
  view.check();
  return view;
}

void save_camera_view(const geom::CameraView& view, const std::filesystem::path& json_path,
                      const std::string& depth_encoding) {
  view.check();
  auto dir = json_path.parent_path();
  std::string stem = json_path.stem().string();
  std::string rgb_name = stem + "_rgb.png";
  std::string depth_name = depth_encoding == "f32" ? stem + "_depth.f32" : stem + "_depth.png";
  save_png_rgb(view.rgb, dir / rgb_name);
  if (depth_encoding == "f32") save_depth_f32(view.depth, dir / depth_name);
  else if (depth_encoding == "png_mm16") save_depth_png16(view.depth, dir / depth_name);
  else raise(ErrorCode::InvalidArgument, "save_camera_view: unknown encoding " + depth_encoding);

  ordered_json j;
  j["view_id"] = view.view_id;
  std::vector<double> k(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) k[std::size_t(r) * 3 + c] = view.intrinsics(r, c);
  j["intrinsics"] = k;
  j["extrinsics"] = {
      {"position", {view.extrinsics.position.x(), view.extrinsics.position.y(), view.extrinsics.position.z()}},
      {"quaternion_wxyz",
       {view.extrinsics.rotation.w(), view.extrinsics.rotation.x(), view.extrinsics.rotation.y(),
        view.extrinsics.rotation.z()}}};
  j["rgb_path"] = rgb_name;
  j["depth_path"] = depth_name;
  j["depth_encoding"] = depth_encoding;
  j["width"] = view.depth.width;
  j["height"] = view.depth.height;
  write_file(json_path, j.dump(2) + "\n");
}

}  // namespace manip::io
