#include <algorithm>
#include <cmath>

#include "gblend/kernels.hpp"

namespace gblend::kernels {

void composite_samples_scalar(std::span<const SampleSplat> splats, std::span<const double> xs,
                              std::span<const double> ys, const CompositeParams& params,
                              SampleOutputs out) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = 0.0, g = 0.0, b = 0.0, t = 1.0;
    for (const SampleSplat& s : splats) {
      const double dx = xs[i] - s.mx;
      const double dy = ys[i] - s.my;
      const double q = s.qa * dx * dx + 2.0 * s.qb * dx * dy + s.qc * dy * dy;
      double alpha = s.opacity * std::exp(-0.5 * q);
      if (params.legacy_clamp) {
        if (alpha < 1.0 / 255.0) continue;
        alpha = std::min(alpha, 0.99);
      }
      const double w = alpha * t;
      r += s.r * w;
      g += s.g * w;
      b += s.b * w;
      t -= w;
      if (t < params.epsilon) break;
    }
    out.r[i] = r;
    out.g[i] = g;
    out.b[i] = b;
    out.t[i] = t;
  }
}

}  // namespace gblend::kernels
