#include <cstring>
#include <fstream>
#include <sstream>

#include "manip/io.hpp"

namespace manip::io {

namespace {

static_assert(sizeof(float) == 4);

void put_f32(std::string& out, float v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

struct PlyProperty {
  std::string name;
  std::string type;
  int size = 0;
};

int scalar_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" || type == "float" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

double read_scalar(const char* p, const std::string& type) {
  if (type == "float" || type == "float32") {
    float v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (type == "double" || type == "float64") {
    double v;
    std::memcpy(&v, p, 8);
    return v;
  }
  if (type == "uchar" || type == "uint8") return double(*reinterpret_cast<const std::uint8_t*>(p));
  if (type == "char" || type == "int8") return double(*reinterpret_cast<const std::int8_t*>(p));
  if (type == "ushort" || type == "uint16") {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "short" || type == "int16") {
    std::int16_t v;
    std::memcpy(&v, p, 2);
    return v;
  }
  if (type == "uint" || type == "uint32") {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  if (type == "int" || type == "int32") {
    std::int32_t v;
    std::memcpy(&v, p, 4);
    return v;
  }
  raise(ErrorCode::Io, "ply: unsupported property type '" + type + "'");
}

}  // namespace

std::string ply_to_string(const geom::PointCloud& cloud, const PlyOptions& opts) {
  bool all_labeled = !cloud.empty();
  for (const auto& p : cloud.points)
    if (!p.label) all_labeled = false;
  bool write_label = opts.with_label && all_labeled;

  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n";
  header << "element vertex " << cloud.size() << "\n";
  header << "property float x\nproperty float y\nproperty float z\n";
  header << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (opts.with_height) header << "property float height\n";
  if (write_label) header << "property uchar label\n";
  header << "end_header\n";

  std::string out = header.str();
  out.reserve(out.size() + cloud.size() * 20);
  for (const auto& p : cloud.points) {
    put_f32(out, float(p.position.x()));
    put_f32(out, float(p.position.y()));
    put_f32(out, float(p.position.z()));
    out.push_back(char(p.color[0]));
    out.push_back(char(p.color[1]));
    out.push_back(char(p.color[2]));
    if (opts.with_height) put_f32(out, float(p.height));
    if (write_label) out.push_back(char(static_cast<std::uint8_t>(*p.label)));
  }
  return out;
}

geom::PointCloud ply_from_string(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string line;
  if (!std::getline(in, line) || line != "ply") raise(ErrorCode::Io, "ply: bad magic");
  std::vector<PlyProperty> props;
  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool binary_le = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = (fmt == "binary_little_endian");
    } else if (word == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      in_vertex = (name == "vertex");
      if (in_vertex) vertex_count = count;
      else if (count > 0) raise(ErrorCode::Io, "ply: unsupported non-vertex element '" + name + "'");
    } else if (word == "property" && in_vertex) {
      PlyProperty p;
      ls >> p.type >> p.name;
      if (p.type == "list") raise(ErrorCode::Io, "ply: list properties unsupported");
      p.size = scalar_size(p.type);
      if (p.size == 0) raise(ErrorCode::Io, "ply: unknown type '" + p.type + "'");
      props.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!binary_le) raise(ErrorCode::Io, "ply: only binary_little_endian supported");

  std::size_t stride = 0;
  for (const auto& p : props) stride += p.size;
  std::size_t offset = std::size_t(in.tellg());
  if (bytes.size() < offset + stride * vertex_count) raise(ErrorCode::Io, "ply: truncated body");

  geom::PointCloud cloud;
  cloud.points.resize(vertex_count);
  const char* base = bytes.data() + offset;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    const char* rec = base + i * stride;
    std::size_t off = 0;
    bool has_label = false;
    std::uint8_t label = 0;
    for (const auto& prop : props) {
      double v = read_scalar(rec + off, prop.type);
      off += prop.size;
      geom::Point& pt = cloud.points[i];
      if (prop.name == "x") pt.position.x() = v;
      else if (prop.name == "y") pt.position.y() = v;
      else if (prop.name == "z") pt.position.z() = v;
      else if (prop.name == "red") pt.color[0] = std::uint8_t(v);
      else if (prop.name == "green") pt.color[1] = std::uint8_t(v);
      else if (prop.name == "blue") pt.color[2] = std::uint8_t(v);
      else if (prop.name == "height") pt.height = v;
      else if (prop.name == "label") {
        has_label = true;
        label = std::uint8_t(v);
      }
    }
    if (has_label) {
      if (label > 3) raise(ErrorCode::Io, "ply: label out of range");
      cloud.points[i].label = static_cast<geom::PointLabel>(label);
    }
  }
  return cloud;
}

void save_ply(const geom::PointCloud& cloud, const std::filesystem::path& path,
              const PlyOptions& opts) {
  write_file(path, ply_to_string(cloud, opts));
}

geom::PointCloud load_ply(const std::filesystem::path& path) {
  return ply_from_string(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) raise(ErrorCode::Io, "short write to " + path.string());
}

namespace {
constexpr char kBase64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::string& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = std::uint32_t(std::uint8_t(bytes[i])) << 16;
    if (i + 1 < bytes.size()) chunk |= std::uint32_t(std::uint8_t(bytes[i + 1])) << 8;
    if (i + 2 < bytes.size()) chunk |= std::uint32_t(std::uint8_t(bytes[i + 2]));
    out.push_back(kBase64Chars[(chunk >> 18) & 63]);
    out.push_back(kBase64Chars[(chunk >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kBase64Chars[(chunk >> 6) & 63] : '=');
    out.push_back(i + 2 < bytes.size() ? kBase64Chars[chunk & 63] : '=');
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  std::uint32_t chunk = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = value_of(c);
    if (v < 0) raise(ErrorCode::Io, "invalid base64 payload");
    chunk = (chunk << 6) | std::uint32_t(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(char((chunk >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace manip::io
