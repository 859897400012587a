#pragma once

// Transmittance-error harness and image metrics.

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "gblend/blend.hpp"
#include "gblend/raster.hpp"

namespace gblend {

/// o exp(-|x - mu|^2 / (2 sigma^2)).
struct IsoSplat2D {
  Vec2 mu;
  double sigma = 1.0;
  double opacity = 1.0;
};

struct PixelBox {
  double x0 = -0.5, y0 = -0.5, x1 = 0.5, y1 = 0.5;
};

/// Integral of prod_j (1 - alpha_j(x)) over the box. Up to kClosedFormMax
/// splats this is the exact inclusion-exclusion expansion (every product of
/// isotropic Gaussians is again one); beyond that it falls back to
/// quadrature.
inline constexpr std::size_t kClosedFormMax = 12;
double true_residual_transmittance(std::span<const IsoSplat2D> splats, const PixelBox& box = {});

/// Quadrature of the same quantity: adaptive Gauss-Kronrod over y, composite
/// Gauss-Legendre over x.
double quadrature_residual_transmittance(std::span<const IsoSplat2D> splats,
                                         const PixelBox& box = {}, double tol = 1e-11);

enum class SweepVar { MuX, Sigma };
std::string_view to_string(SweepVar v);

struct SweepConfig {
  std::vector<BlendMode> modes{BlendMode::ScalarCenter, BlendMode::ScalarIntegrated,
                               BlendMode::GaussianBlending, BlendMode::Supersample};
  SweepVar variable = SweepVar::MuX;
  double start = -3.0;
  double stop = 3.0;
  /// Linear step, or log10 step when log_spaced.
  double step = 0.05;
  bool log_spaced = false;

  double mu_x = 0.5;       // held fixed when sweeping sigma
  double sigma = 1.0;      // held fixed when sweeping mu_x
  double offset_y = 0.1;   // centers at [mu_x, -offset_y] and [mu_x, +offset_y]
  double opacity1 = 1.0;
  double opacity2 = 1.0;

  int supersample_k = 256;
  double epsilon = 1e-4;
  bool legacy_alpha_clamp = true;
  bool mode_lowpass = true;  // add default_lowpass(mode) to the splat covariances
  int threads = 0;

  static SweepConfig mu_sweep();
  static SweepConfig sigma_sweep();
  void validate() const;
  std::vector<double> grid() const;
};

struct SweepPoint {
  double mu_x = 0.0;
  double sigma = 1.0;
};

struct TransmittanceSample {
  double t_mode = 1.0;
  double t_true = 1.0;
  double delta() const { return t_mode - t_true; }
};

/// Both splats composited over the unit pixel centered at the origin,
/// splat 1 (y = -offset_y) in front.
TransmittanceSample transmittance_error(BlendMode mode, const SweepConfig& cfg, SweepPoint p);

struct SweepRow {
  double value = 0.0;
  BlendMode mode = BlendMode::GaussianBlending;
  double delta_t = 0.0;
};

struct SweepSummary {
  BlendMode mode;
  double mean_abs_delta = 0.0;
};

struct SweepTable {
  SweepVar variable = SweepVar::MuX;
  std::vector<SweepRow> rows;  // grid-major, then config mode order

  std::vector<double> deltas(BlendMode mode) const;
  std::vector<SweepSummary> summary() const;
};

SweepTable run_sweep(const SweepConfig& cfg);

/// Header `sweep_var,value,mode,delta_t`, one line per row.
void write_sweep_csv(std::ostream& os, const SweepTable& table);
void print_sweep_summary(std::ostream& os, const SweepTable& table);

/// PSNR over linear rgb clamped to [0,1]; identical images report kPsnrCap.
inline constexpr double kPsnrCap = 99.0;
double mse(const Framebuffer& a, const Framebuffer& b);
double psnr(const Framebuffer& a, const Framebuffer& b);

}  // namespace gblend
