#pragma once

// File formats: trained-splat PLY, camera JSON.

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gblend/scene.hpp"

namespace gblend {

/// Parse failure; offset is the byte position in the file where it was detected.
class PlyError : public std::runtime_error {
 public:
  PlyError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Binary little-endian PLY with the usual trained-splat vertex layout.
/// Activations are applied on ingest: opacity <- logistic, scale <- exp,
/// rot <- normalize. f_rest_* is channel-major in the file, band-major in
/// memory.
std::vector<Splat3D> parse_ply(std::string_view bytes);
std::vector<Splat3D> load_ply(const std::filesystem::path& path);

/// Inverse of parse_ply; all splats must share the same SH count.
std::string serialize_ply(const std::vector<Splat3D>& splats);
void save_ply(const std::filesystem::path& path, const std::vector<Splat3D>& splats);

/// {fx, fy, cx, cy, width, height, world_to_cam: [12, row-major], near,
///  scale (optional)}; "scale" is applied via Camera::scaled.
Camera camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const Camera& cam);
Camera load_camera(const std::filesystem::path& path);
void save_camera(const std::filesystem::path& path, const Camera& cam);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace gblend
