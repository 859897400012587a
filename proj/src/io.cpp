#include "gblend/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace gblend {
namespace {

static_assert(std::endian::native == std::endian::little, "PLY reader assumes a little-endian host");

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_type(std::string_view name) {
  static const std::map<std::string_view, ScalarType> kTypes = {
      {"char", ScalarType::Int8},     {"int8", ScalarType::Int8},
      {"uchar", ScalarType::UInt8},   {"uint8", ScalarType::UInt8},
      {"short", ScalarType::Int16},   {"int16", ScalarType::Int16},
      {"ushort", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},
      {"int", ScalarType::Int32},     {"int32", ScalarType::Int32},
      {"uint", ScalarType::UInt32},   {"uint32", ScalarType::UInt32},
      {"float", ScalarType::Float32}, {"float32", ScalarType::Float32},
      {"double", ScalarType::Float64}, {"float64", ScalarType::Float64}};
  const auto it = kTypes.find(name);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

template <typename T>
T load_as(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

double read_scalar(ScalarType t, const char* p) {
  switch (t) {
    case ScalarType::Int8: return load_as<std::int8_t>(p);
    case ScalarType::UInt8: return load_as<std::uint8_t>(p);
    case ScalarType::Int16: return load_as<std::int16_t>(p);
    case ScalarType::UInt16: return load_as<std::uint16_t>(p);
    case ScalarType::Int32: return load_as<std::int32_t>(p);
    case ScalarType::UInt32: return load_as<std::uint32_t>(p);
    case ScalarType::Float32: return load_as<float>(p);
    case ScalarType::Float64: return load_as<double>(p);
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type;
  std::size_t offset;  // within the vertex record
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> props;
  std::size_t stride = 0;
  bool has_list = false;
};

struct Header {
  std::vector<Element> elements;
  std::size_t data_start = 0;
};

Header parse_header(std::string_view bytes) {
  Header h;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  while (true) {
    const std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) throw PlyError("unterminated PLY header", pos);
    std::string_view line = bytes.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_start = pos;
    pos = eol + 1;

    if (first) {
      if (line != "ply") throw PlyError("missing 'ply' magic", 0);
      first = false;
      continue;
    }
    std::istringstream in{std::string(line)};
    std::string keyword;
    in >> keyword;
    if (keyword == "end_header") {
      h.data_start = pos;
      break;
    }
    if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
    if (keyword == "format") {
      std::string fmt, version;
      in >> fmt >> version;
      if (fmt != "binary_little_endian")
        throw PlyError("unsupported PLY encoding '" + fmt + "', expected binary_little_endian",
                       line_start);
      saw_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      in >> e.name >> count;
      if (!in || count < 0) throw PlyError("malformed element line", line_start);
      e.count = static_cast<std::size_t>(count);
      h.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (h.elements.empty()) throw PlyError("property before any element", line_start);
      Element& e = h.elements.back();
      std::string type_name;
      in >> type_name;
      if (type_name == "list") {
        e.has_list = true;
        continue;
      }
      const auto type = parse_type(type_name);
      if (!type) throw PlyError("unknown property type '" + type_name + "'", line_start);
      Property p;
      in >> p.name;
      p.type = *type;
      p.offset = e.stride;
      e.stride += type_size(*type);
      e.props.push_back(std::move(p));
    } else {
      throw PlyError("unexpected header keyword '" + keyword + "'", line_start);
    }
  }
  if (!saw_format) throw PlyError("PLY header has no format line", h.data_start);
  return h;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<Splat3D> parse_ply(std::string_view bytes) {
  const Header h = parse_header(bytes);
  std::size_t offset = h.data_start;
  const Element* vertex = nullptr;
  for (const Element& e : h.elements) {
    if (e.name == "vertex") {
      vertex = &e;
      break;
    }
    if (e.has_list) throw PlyError("list element precedes vertex data", offset);
    offset += e.count * e.stride;
  }
  if (!vertex) throw PlyError("no vertex element", h.data_start);
  if (vertex->has_list) throw PlyError("vertex element has list properties", h.data_start);

  std::map<std::string, const Property*> by_name;
  for (const Property& p : vertex->props) by_name[p.name] = &p;
  auto require = [&](const std::string& name) -> const Property& {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw PlyError("missing required property '" + name + "'", h.data_start);
    return *it->second;
  };

  const std::array<const Property*, 3> pos = {&require("x"), &require("y"), &require("z")};
  const std::array<const Property*, 3> dc = {&require("f_dc_0"), &require("f_dc_1"),
                                             &require("f_dc_2")};
  const Property& opacity = require("opacity");
  const std::array<const Property*, 3> scale = {&require("scale_0"), &require("scale_1"),
                                                &require("scale_2")};
  const std::array<const Property*, 4> rot = {&require("rot_0"), &require("rot_1"),
                                              &require("rot_2"), &require("rot_3")};
  std::vector<const Property*> rest;
  while (true) {
    const auto it = by_name.find("f_rest_" + std::to_string(rest.size()));
    if (it == by_name.end()) break;
    rest.push_back(it->second);
  }
  if (rest.size() % 3 != 0 || !is_valid_sh_count(1 + rest.size() / 3))
    throw PlyError("unsupported f_rest count " + std::to_string(rest.size()) +
                       " (expected 0, 9, 24 or 45)",
                   h.data_start);
  const std::size_t per_channel = rest.size() / 3;

  const std::size_t need = vertex->count * vertex->stride;
  if (offset > bytes.size() || bytes.size() - offset < need) {
    const std::size_t have = offset > bytes.size() ? 0 : bytes.size() - offset;
    throw PlyError("truncated vertex payload: need " + std::to_string(need) + " bytes, have " +
                       std::to_string(have),
                   bytes.size());
  }

  std::vector<Splat3D> out;
  out.reserve(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    const char* rec = bytes.data() + offset + i * vertex->stride;
    auto get = [&](const Property* p) { return read_scalar(p->type, rec + p->offset); };
    Splat3D s;
    s.mu = {get(pos[0]), get(pos[1]), get(pos[2])};
    s.scale = {std::exp(get(scale[0])), std::exp(get(scale[1])), std::exp(get(scale[2]))};
    Eigen::Quaterniond q(get(rot[0]), get(rot[1]), get(rot[2]), get(rot[3]));
    const double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw PlyError("vertex " + std::to_string(i) + " has a zero or non-finite rotation",
                     offset + i * vertex->stride);
    s.rot = Eigen::Quaterniond(q.coeffs() / n);
    s.opacity = logistic(get(&opacity));
    s.sh.assign(1 + per_channel, Eigen::Vector3d::Zero());
    s.sh[0] = {get(dc[0]), get(dc[1]), get(dc[2])};
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < per_channel; ++k) s.sh[1 + k][c] = get(rest[c * per_channel + k]);
    out.push_back(std::move(s));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<Splat3D> load_ply(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return parse_ply(bytes);
  } catch (const PlyError& e) {
    throw PlyError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string serialize_ply(const std::vector<Splat3D>& splats) {
  const std::size_t sh_count = splats.empty() ? 1 : splats.front().sh.size();
  for (const Splat3D& s : splats)
    if (s.sh.size() != sh_count || !is_valid_sh_count(s.sh.size()))
      throw std::invalid_argument("serialize_ply: inconsistent SH coefficient count");
  const std::size_t per_channel = sh_count - 1;

  std::ostringstream h;
  h << "ply\nformat binary_little_endian 1.0\nelement vertex " << splats.size() << "\n";
  for (const char* n : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"})
    h << "property float " << n << "\n";
  for (std::size_t i = 0; i < 3 * per_channel; ++i) h << "property float f_rest_" << i << "\n";
  h << "property float opacity\n";
  for (const char* n : {"scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
    h << "property float " << n << "\n";
  h << "end_header\n";

  std::string out = h.str();
  std::vector<float> rec;
  for (const Splat3D& s : splats) {
    rec.clear();
    rec.insert(rec.end(), {float(s.mu.x()), float(s.mu.y()), float(s.mu.z()), 0.f, 0.f, 0.f});
    for (int c = 0; c < 3; ++c) rec.push_back(float(s.sh[0][c]));
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < per_channel; ++k) rec.push_back(float(s.sh[1 + k][c]));
    const double o = std::clamp(s.opacity, 1e-12, 1.0 - 1e-12);
    rec.push_back(float(std::log(o / (1.0 - o))));
    for (int c = 0; c < 3; ++c) rec.push_back(float(std::log(s.scale[c])));
    const Eigen::Quaterniond q = s.rot.normalized();
    rec.insert(rec.end(), {float(q.w()), float(q.x()), float(q.y()), float(q.z())});
    out.append(reinterpret_cast<const char*>(rec.data()), rec.size() * sizeof(float));
  }
  return out;
}

void save_ply(const std::filesystem::path& path, const std::vector<Splat3D>& splats) {
  write_file(path, serialize_ply(splats));
}

Camera camera_from_json(const nlohmann::json& j) {
  Camera cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.near = j.value("near", 0.01);
    const auto w = j.at("world_to_cam").get<std::vector<double>>();
    if (w.size() != 12) throw std::invalid_argument("camera: world_to_cam must have 12 numbers");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) cam.world_to_cam(r, c) = w[r * 4 + c];
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("camera: ") + e.what());
  }
  if (j.contains("scale")) cam = cam.scaled(j.at("scale").get<double>());
  cam.validate();
  return cam;
}

nlohmann::json camera_to_json(const Camera& cam) {
  std::vector<double> w;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) w.push_back(cam.world_to_cam(r, c));
  return {{"fx", cam.fx},       {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},       {"width", cam.width},   {"height", cam.height},
          {"near", cam.near},   {"world_to_cam", w}};
}

Camera load_camera(const std::filesystem::path& path) {
  try {
    return camera_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void save_camera(const std::filesystem::path& path, const Camera& cam) {
  write_file(path, camera_to_json(cam).dump(2) + "\n");
}

}  // namespace gblend
