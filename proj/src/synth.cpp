#include "gblend/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gblend {

namespace {

Camera square_camera(int size) {
  Camera cam;
  cam.fx = cam.fy = size;
  cam.cx = cam.cy = 0.5 * size;
  cam.width = cam.height = size;
  return cam;
}

Splat3D flat_splat(double x, double y, double z, double sigma, double opacity, const Rgb& color) {
  Splat3D s;
  s.mu = {x, y, z};
  s.scale = {sigma, sigma, 0.02 * sigma};
  s.opacity = opacity;
  s.sh = {sh_dc_for_color(color)};
  return s;
}

// Jittered square lattice over [-half, half]^2 at depth z; `keep` filters
// lattice sites by their unjittered position.
template <class Keep>
void add_plane(std::vector<Splat3D>& out, SynthRng& rng, double half, double pitch, double z,
               double sigma, const Rgb& color, Keep keep) {
  const int n = static_cast<int>(std::ceil(half / pitch));
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const double x = i * pitch, y = j * pitch;
      const double jx = rng.uniform(-0.25, 0.25) * pitch;
      const double jy = rng.uniform(-0.25, 0.25) * pitch;
      if (keep(x, y)) out.push_back(flat_splat(x + jx, y + jy, z, sigma, 1.0, color));
    }
  }
}

}  // namespace

SynthScene two_plane_scene(std::uint64_t seed, const TwoPlaneParams& p) {
  if (p.size < 1 || !(p.front_depth > 0.0) || !(p.back_depth > p.front_depth))
    throw std::invalid_argument("two-plane: invalid parameters");
  SynthScene scene{"two-plane", {}, square_camera(p.size)};
  SynthRng rng(seed);
  const double f = scene.camera.fx;

  const double back_pitch = p.spacing_px * p.back_depth / f;
  const double back_half = 0.5 * p.size / f * p.back_depth + 4.0 * back_pitch;
  add_plane(scene.splats, rng, back_half, back_pitch, p.back_depth, p.sigma_ratio * back_pitch, p.back,
            [](double, double) { return true; });

  const double front_pitch = p.spacing_px * p.front_depth / f;
  const double r2 = p.disk_radius * p.disk_radius;
  add_plane(scene.splats, rng, p.disk_radius, front_pitch, p.front_depth,
            p.sigma_ratio * front_pitch, p.front,
            [r2](double x, double y) { return x * x + y * y <= r2; });
  return scene;
}

double two_plane_edge_x(const TwoPlaneParams& p) {
  return 0.5 * p.size + p.size * p.disk_radius / p.front_depth;
}

SynthScene checker_wall_scene(std::uint64_t seed, int size, int cell_px) {
  if (size < 1 || cell_px < 1) throw std::invalid_argument("checker: invalid parameters");
  SynthScene scene{"checker", {}, square_camera(size)};
  SynthRng rng(seed);
  constexpr double z = 6.0;
  const double pitch = z / scene.camera.fx;
  const double half = 0.5 * size * pitch + 4.0 * pitch;
  const int n = static_cast<int>(std::ceil(half / pitch));
  const Rgb light{0.85, 0.85, 0.8}, dark{0.08, 0.1, 0.12};
  for (int j = -n; j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      const int cx = static_cast<int>(std::floor(static_cast<double>(i) / cell_px));
      const int cy = static_cast<int>(std::floor(static_cast<double>(j) / cell_px));
      const Rgb& c = ((cx + cy) % 2 == 0) ? light : dark;
      const double jx = rng.uniform(-0.1, 0.1) * pitch;
      const double jy = rng.uniform(-0.1, 0.1) * pitch;
      scene.splats.push_back(flat_splat(i * pitch + jx, j * pitch + jy, z, 0.6 * pitch, 1.0, c));
    }
  }
  return scene;
}

SynthScene random_cloud_scene(std::uint64_t seed, std::size_t n, int size) {
  if (size < 1) throw std::invalid_argument("cloud: invalid size");
  SynthScene scene{"cloud", {}, square_camera(size)};
  SynthRng rng(seed);
  scene.splats.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Splat3D s;
    const double z = rng.uniform(3.0, 12.0);
    const double half = 0.55 * z;  // slightly wider than the 0.5 z frustum
    s.mu = {rng.uniform(-half, half), rng.uniform(-half, half), z};
    const double base = z / size;  // one pixel in world units at this depth
    for (int a = 0; a < 3; ++a) s.scale[a] = base * std::exp(rng.uniform(std::log(0.3), std::log(6.0)));

    // Uniform random rotation (Shoemake).
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double t2 = 2.0 * std::numbers::pi * u2, t3 = 2.0 * std::numbers::pi * u3;
    s.rot = Eigen::Quaterniond(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));

    s.opacity = rng.uniform(0.2, 1.0);
    const Rgb color{rng.uniform(), rng.uniform(), rng.uniform()};
    s.sh.assign(4, Eigen::Vector3d::Zero());
    s.sh[0] = sh_dc_for_color(color);
    for (int band = 1; band < 4; ++band)
      s.sh[band] = {rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1)};
    scene.splats.push_back(std::move(s));
  }
  return scene;
}

SynthScene make_synth_scene(std::string_view name, std::uint64_t seed, std::size_t cloud_count) {
  if (name == "two-plane") return two_plane_scene(seed);
  if (name == "checker") return checker_wall_scene(seed);
  if (name == "cloud") return random_cloud_scene(seed, cloud_count);
  throw std::invalid_argument("unknown synthetic scene '" + std::string(name) +
                              "' (expected two-plane, checker or cloud)");
}

Camera crop_camera(const Camera& cam, int x0, int y0, int w, int h) {
  if (w < 1 || h < 1) throw std::invalid_argument("crop size must be positive");
  Camera out = cam;
  out.cx -= x0;
  out.cy -= y0;
  out.width = w;
  out.height = h;
  return out;
}

}  // namespace gblend
