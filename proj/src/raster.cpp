#include "gblend/raster.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace gblend {

ScreenBox support_box(const ProjectedSplat& s, double k_sigma) {
  const double rx = k_sigma * std::sqrt(s.cov2d.xx);
  const double ry = k_sigma * std::sqrt(s.cov2d.yy);
  return {s.mu2d.x - rx, s.mu2d.y - ry, s.mu2d.x + rx, s.mu2d.y + ry};
}

namespace {

std::vector<std::uint32_t> depth_order(std::span<const ProjectedSplat> projected) {
  std::vector<std::uint32_t> order(projected.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return projected[a].depth < projected[b].depth;
  });
  return order;
}

}  // namespace

TileBins bin_splats(std::span<const ProjectedSplat> projected, int width, int height,
                    int tile_size, double support_sigma) {
  if (tile_size <= 0) throw std::invalid_argument("tile size must be positive");
  TileBins bins;
  bins.tile_size = tile_size;
  bins.tiles_x = (width + tile_size - 1) / tile_size;
  bins.tiles_y = (height + tile_size - 1) / tile_size;
  bins.lists.resize(std::size_t(bins.tiles_x) * bins.tiles_y);

  // Visiting splats in global depth order makes every tile list sorted.
  for (const std::uint32_t idx : depth_order(projected)) {
    const ScreenBox box = support_box(projected[idx], support_sigma);
    const double ts = tile_size;
    const int tx0 = std::max(0, static_cast<int>(std::floor(box.x0 / ts)));
    const int ty0 = std::max(0, static_cast<int>(std::floor(box.y0 / ts)));
    const int tx1 = std::min(bins.tiles_x - 1, static_cast<int>(std::floor(box.x1 / ts)));
    const int ty1 = std::min(bins.tiles_y - 1, static_cast<int>(std::floor(box.y1 / ts)));
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        if (overlaps(box, tx * ts, ty * ts, (tx + 1) * ts, (ty + 1) * ts))
          bins.lists[std::size_t(ty) * bins.tiles_x + tx].push_back(idx);
  }
  return bins;
}

BlendSettings blend_settings(BlendMode mode, const RenderOptions& opts) {
  BlendSettings st;
  st.mode = mode;
  st.supersample_k = opts.supersample_k;
  st.background = opts.background;
  st.epsilon = opts.epsilon;
  st.legacy_alpha_clamp = opts.legacy_alpha_clamp;
  return st;
}

namespace {

void validate(const RenderOptions& opts) {
  if (!(opts.epsilon > 0.0 && opts.epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (opts.supersample_k < 1) throw std::invalid_argument("supersample K must be >= 1");
  if (opts.tile_size < 1) throw std::invalid_argument("tile size must be >= 1");
  if (!(opts.support_sigma > 0.0)) throw std::invalid_argument("support cutoff must be positive");
}

// Pixel-level support filter. Because it tests against the pixel square,
// the surviving list does not depend on the tile size.
void pixel_list(std::span<const ScreenBox> boxes, std::span<const std::uint32_t> candidates,
                int px, int py, std::vector<std::uint32_t>& out) {
  out.clear();
  for (const std::uint32_t idx : candidates)
    if (overlaps(boxes[idx], px, py, px + 1.0, py + 1.0)) out.push_back(idx);
}

}  // namespace

Framebuffer render_projected(std::span<const ProjectedSplat> projected, int width, int height,
                             BlendMode mode, const RenderOptions& opts, RenderStats* stats) {
  validate(opts);
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame size must be positive");
  const auto start = std::chrono::steady_clock::now();

  const TileBins bins = bin_splats(projected, width, height, opts.tile_size, opts.support_sigma);
  std::vector<ScreenBox> boxes;
  boxes.reserve(projected.size());
  for (const ProjectedSplat& s : projected) boxes.push_back(support_box(s, opts.support_sigma));

  Framebuffer fb(width, height);
  const BlendSettings settings = blend_settings(mode, opts);
  const int tile_count = bins.tiles_x * bins.tiles_y;
  std::atomic<int> next_tile{0};

  auto worker = [&] {
    std::vector<std::uint32_t> list;
    while (true) {
      const int tile = next_tile.fetch_add(1, std::memory_order_relaxed);
      if (tile >= tile_count) break;
      const int tx = tile % bins.tiles_x;
      const int ty = tile / bins.tiles_x;
      const auto& candidates = bins.lists[tile];
      const int x_end = std::min(width, (tx + 1) * bins.tile_size);
      const int y_end = std::min(height, (ty + 1) * bins.tile_size);
      for (int py = ty * bins.tile_size; py < y_end; ++py) {
        for (int px = tx * bins.tile_size; px < x_end; ++px) {
          pixel_list(boxes, candidates, px, py, list);
          const PixelResult r = blend_pixel(projected, list, px, py, settings);
          fb.at(px, py) = r.color;
          fb.residual_at(px, py) = r.residual;
        }
      }
    }
  };

  int threads = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, tile_count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  if (stats) {
    stats->projected = projected.size();
    stats->pairs = 0;
    for (const auto& l : bins.lists) stats->pairs += l.size();
    stats->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return fb;
}

Framebuffer render(std::span<const Splat3D> splats, const Camera& cam, BlendMode mode,
                   const RenderOptions& opts, RenderStats* stats) {
  cam.validate();
  const auto start = std::chrono::steady_clock::now();
  ProjectionOptions popts;
  popts.lowpass = opts.lowpass.value_or(default_lowpass(mode));
  ProjectionStats pstats;
  const std::vector<ProjectedSplat> projected = project_all(splats, cam, popts, &pstats);
  Framebuffer fb = render_projected(projected, cam.width, cam.height, mode, opts, stats);
  if (stats) {
    stats->projection = pstats;
    stats->seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return fb;
}

Framebuffer render_unbinned(std::span<const ProjectedSplat> projected, int width, int height,
                            BlendMode mode, const RenderOptions& opts) {
  validate(opts);
  const std::vector<std::uint32_t> order = depth_order(projected);
  std::vector<ScreenBox> boxes;
  for (const ProjectedSplat& s : projected) boxes.push_back(support_box(s, opts.support_sigma));
  const BlendSettings settings = blend_settings(mode, opts);
  Framebuffer fb(width, height);
  std::vector<std::uint32_t> list;
  for (int py = 0; py < height; ++py) {
    for (int px = 0; px < width; ++px) {
      pixel_list(boxes, order, px, py, list);
      const PixelResult r = blend_pixel(projected, list, px, py, settings);
      fb.at(px, py) = r.color;
      fb.residual_at(px, py) = r.residual;
    }
  }
  return fb;
}

}  // namespace gblend
