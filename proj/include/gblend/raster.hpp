#pragma once

// Tile-binned, front-to-back, multi-threaded full-frame rendering.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gblend/blend.hpp"
#include "gblend/scene.hpp"

namespace gblend {

/// Linear-light rgb plus the residual transmittance of every pixel.
struct Framebuffer {
  int width = 0;
  int height = 0;
  std::vector<Rgb> rgb;
  std::vector<double> residual;

  Framebuffer() = default;
  Framebuffer(int w, int h, Rgb fill = {}, double fill_residual = 1.0)
      : width(w), height(h), rgb(std::size_t(w) * h, fill), residual(std::size_t(w) * h, fill_residual) {}

  Rgb& at(int x, int y) { return rgb[std::size_t(y) * width + x]; }
  const Rgb& at(int x, int y) const { return rgb[std::size_t(y) * width + x]; }
  double& residual_at(int x, int y) { return residual[std::size_t(y) * width + x]; }
  double residual_at(int x, int y) const { return residual[std::size_t(y) * width + x]; }

  bool operator==(const Framebuffer&) const = default;
};

/// Axis-aligned screen box, [x0, x1] x [y0, y1].
struct ScreenBox {
  double x0, y0, x1, y1;
};

/// Tight bounding box of the k-sigma ellipse: mu2d +- k sqrt(diag(cov2d)),
/// i.e. the ellipse with semi-axes k sqrt(lambda) along the eigen-axes.
ScreenBox support_box(const ProjectedSplat& s, double k_sigma);

/// Open-interval overlap test between a support box and [x0,x1] x [y0,y1].
constexpr bool overlaps(const ScreenBox& b, double x0, double y0, double x1, double y1) {
  return b.x0 < x1 && b.x1 > x0 && b.y0 < y1 && b.y1 > y0;
}

struct TileBins {
  int tile_size = 16;
  int tiles_x = 0;
  int tiles_y = 0;
  /// Per tile (row-major), indices into the projected list, front-to-back.
  /// Equal depths keep input order.
  std::vector<std::vector<std::uint32_t>> lists;

  const std::vector<std::uint32_t>& tile(int tx, int ty) const {
    return lists[std::size_t(ty) * tiles_x + tx];
  }
};

TileBins bin_splats(std::span<const ProjectedSplat> projected, int width, int height,
                    int tile_size, double support_sigma = 3.0);

struct RenderOptions {
  double epsilon = 1e-4;
  int tile_size = 16;
  int supersample_k = 16;
  Rgb background{0.0, 0.0, 0.0};
  int threads = 0;  // 0: std::thread::hardware_concurrency()
  double support_sigma = 3.0;
  std::optional<double> lowpass;  // default: default_lowpass(mode)
  bool legacy_alpha_clamp = true;
};

struct RenderStats {
  ProjectionStats projection;
  std::size_t projected = 0;
  std::size_t pairs = 0;  // (tile, splat) entries after binning
  double seconds = 0.0;
};

Framebuffer render(std::span<const Splat3D> splats, const Camera& cam, BlendMode mode,
                   const RenderOptions& opts = {}, RenderStats* stats = nullptr);

/// Render already-projected splats into a width x height frame.
Framebuffer render_projected(std::span<const ProjectedSplat> projected, int width, int height,
                             BlendMode mode, const RenderOptions& opts = {},
                             RenderStats* stats = nullptr);

/// Reference path without tiles: every pixel filters and sorts the full list.
Framebuffer render_unbinned(std::span<const ProjectedSplat> projected, int width, int height,
                            BlendMode mode, const RenderOptions& opts = {});

BlendSettings blend_settings(BlendMode mode, const RenderOptions& opts);

}  // namespace gblend
