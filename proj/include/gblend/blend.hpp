#pragma once

// Per-pixel blending kernels.
//
// Four ways to composite a depth-sorted splat list into one pixel:
//   ScalarCenter      alpha = G'(pixel center), scalar transmittance.
//   ScalarIntegrated  alpha = pixel-integrated G', scalar transmittance.
//   GaussianBlending  transmittance is a uniform window (center, sides,
//                     value) that is moment-matched after every splat.
//   Supersample       K x K point samples, each composited with raw
//                     point alphas; converges to the exact pixel integral.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "gblend/kernels.hpp"
#include "gblend/math.hpp"
#include "gblend/scene.hpp"

namespace gblend {

enum class BlendMode { ScalarCenter, ScalarIntegrated, GaussianBlending, Supersample };

std::string_view to_string(BlendMode mode);
/// Accepts center|integrated|gb|ss (and the long names). Throws on unknown.
BlendMode parse_blend_mode(std::string_view name);

/// Screen-space covariance floor used when projecting for a given mode:
/// 0.3 px^2 for ScalarCenter, 0 for the area-integrating modes.
double default_lowpass(BlendMode mode);

/// Uniform transmittance window. `sides` are the extents along the two
/// window axes; the window is re-aligned to each splat's principal axes
/// (rotation <= 45 degrees) when blended, so no orientation is stored.
struct TransmittanceWindow {
  Vec2 center;
  Vec2 sides{1.0, 1.0};
  double value = 1.0;

  double mass() const { return value * sides.x * sides.y; }
};

/// Window expressed in a splat's principal-axis frame. The u axis is the
/// eigenvector closer to screen x and is paired with sides.x.
struct SplatFrame {
  double u = 0.0, v = 0.0;
  double u1 = 0.0, u2 = 0.0;
  double v1 = 0.0, v2 = 0.0;
  double sigma1 = 1.0;  // along u
  double sigma2 = 1.0;  // along v
  Vec2 axis_u{1.0, 0.0};
  Vec2 axis_v{0.0, 1.0};
  bool swapped = false;  // true when u is the minor eigen-axis (e2)
};

/// Moments of t (1 - alpha) over the window, in the splat frame.
struct GaussianMoments {
  double m0 = 0.0;
  Vec2 m1;
  Vec2 m2;
};

struct WindowUpdate {
  double weight = 0.0;
  TransmittanceWindow next;
  bool fallback = false;  // stability guard took the scalar path
};

/// Window sides must lie within [kGuardLow, kGuardHigh] x sigma per axis for
/// the moment update; outside it the splat is blended as a scalar at the
/// window center and the geometry is frozen.
inline constexpr double kGuardLow = 0.1;
inline constexpr double kGuardHigh = 1e6;
inline constexpr double kMinWindowSide = 1e-6;

inline constexpr double kLegacyAlphaMax = 0.99;
inline constexpr double kLegacyAlphaMin = 1.0 / 255.0;

TransmittanceWindow init_window(Vec2 pixel_center);

SplatFrame to_splat_frame(const TransmittanceWindow& win, const ProjectedSplat& splat,
                          const Eigen2& eig);

/// t o I0(u1,u2) I0(v1,v2).
double integrated_weight(const SplatFrame& frame, double t, double o);

GaussianMoments compute_moments(const SplatFrame& frame, double t, double o);

/// Blend one splat onto the window: returns the integrated weight and the
/// moment-matched successor window.
WindowUpdate update_window(const TransmittanceWindow& win, const ProjectedSplat& splat,
                           const Eigen2& eig);

/// Raw o exp(-1/2 d^T Sigma^-1 d) at a point.
double point_alpha(const ProjectedSplat& splat, Vec2 p);

/// Legacy point alpha at the pixel center, clamped to <= 0.99. Callers skip
/// values below 1/255.
double scalar_alpha_center(Vec2 pixel_center, const ProjectedSplat& splat);

/// Pixel-integrated alpha of the unit pixel with lower corner `pixel`,
/// rotated into the splat frame (the same reinterpretation as the first GB
/// window), o I0 I0. Not clamped.
double scalar_alpha_integrated(Vec2 pixel, const ProjectedSplat& splat, const Eigen2& eig);

struct BlendSettings {
  BlendMode mode = BlendMode::GaussianBlending;
  int supersample_k = 16;
  Rgb background{0.0, 0.0, 0.0};
  double epsilon = 1e-4;
  /// Apply the 0.99 / (1/255) alpha conventions in the two scalar modes.
  bool legacy_alpha_clamp = true;
};

struct PixelResult {
  Rgb color;
  double residual = 1.0;
  std::size_t blended = 0;  // splats composited before termination
};

/// Composite a front-to-back sorted list into pixel (px, py), which covers
/// [px, px+1] x [py, py+1].
PixelResult blend_pixel(std::span<const ProjectedSplat> sorted, int px, int py,
                        const BlendSettings& settings);

/// Same, over a subset of `splats` given by `order` (already sorted).
PixelResult blend_pixel(std::span<const ProjectedSplat> splats, std::span<const std::uint32_t> order,
                        int px, int py, const BlendSettings& settings);

SampleSplat to_sample_splat(const ProjectedSplat& s);

}  // namespace gblend
