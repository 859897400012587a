#pragma once

// Point-sampled front-to-back compositing over a batch of sample positions
// that share one depth-sorted splat list. This is the inner loop of the
// supersampling oracle; a scalar reference and an AVX2 variant exist and are
// selected once at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace gblend {

/// Compact splat record for point evaluation.
struct SampleSplat {
  double mx, my;         // mean, pixels
  double qa, qb, qc;     // conic: q = qa dx^2 + 2 qb dx dy + qc dy^2
  double opacity;
  double r, g, b;
};

struct CompositeParams {
  double epsilon = 1e-4;  // stop once transmittance drops below this
  bool legacy_clamp = false;  // alpha <= 0.99, skip alpha < 1/255
};

/// Per-sample outputs; all spans have the same length as xs.
struct SampleOutputs {
  std::span<double> r, g, b, t;
};

enum class KernelIsa { Scalar, Avx2 };

std::string_view to_string(KernelIsa isa);

/// Whether the running CPU supports the AVX2 variant (AVX2 + FMA).
bool avx2_available();

/// The variant used by composite_samples. Defaults to the best available;
/// the environment variable GBLEND_ISA=scalar forces the reference kernel.
KernelIsa active_isa();
void set_active_isa(KernelIsa isa);  // throws if unsupported on this CPU

void composite_samples(std::span<const SampleSplat> splats, std::span<const double> xs,
                       std::span<const double> ys, const CompositeParams& params,
                       SampleOutputs out);

namespace kernels {
void composite_samples_scalar(std::span<const SampleSplat> splats, std::span<const double> xs,
                              std::span<const double> ys, const CompositeParams& params,
                              SampleOutputs out);
void composite_samples_avx2(std::span<const SampleSplat> splats, std::span<const double> xs,
                            std::span<const double> ys, const CompositeParams& params,
                            SampleOutputs out);
}  // namespace kernels

}  // namespace gblend
