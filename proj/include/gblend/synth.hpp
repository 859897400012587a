#pragma once

// Deterministic synthetic scenes used as image-level fixtures.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gblend/scene.hpp"

namespace gblend {

struct SynthScene {
  std::string name;
  std::vector<Splat3D> splats;
  Camera camera;
};

/// Uniform [0, 1) from the top 53 bits, identical on every platform
/// (std::uniform_real_distribution is implementation-defined).
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 gen_;
};

struct TwoPlaneParams {
  int size = 128;             // square frame at scale 1
  double back_depth = 10.0;
  double front_depth = 5.0;
  double disk_radius = 1.5;   // world units, front disk centered on the axis
  double spacing_px = 1.0;    // splat pitch in pixels at scale 1
  double sigma_ratio = 0.7;   // in-plane sigma / pitch
  Rgb front{0.9, 0.2, 0.1};
  Rgb back{0.1, 0.3, 0.9};
};

/// Opaque front disk over a contrasting back plane that fills the frame.
SynthScene two_plane_scene(std::uint64_t seed, const TwoPlaneParams& p = {});

/// Screen x (at scale 1) of the front disk's right edge on the image row
/// through the principal point.
double two_plane_edge_x(const TwoPlaneParams& p = {});

/// Two-colour checkerboard plane filling the frame; `cell_px` is the square
/// size in pixels at scale 1.
SynthScene checker_wall_scene(std::uint64_t seed, int size = 128, int cell_px = 4);

/// n anisotropic, rotated splats with degree-1 SH scattered through the
/// view frustum.
SynthScene random_cloud_scene(std::uint64_t seed, std::size_t n = 2000, int size = 128);

/// Dispatch by name: two-plane | checker | cloud.
SynthScene make_synth_scene(std::string_view name, std::uint64_t seed, std::size_t cloud_count = 2000);

/// The sub-rectangle [x0, x0+w) x [y0, y0+h) of a camera's image.
Camera crop_camera(const Camera& cam, int x0, int y0, int w, int h);

}  // namespace gblend
