#include "gblend/blend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gblend {

std::string_view to_string(BlendMode mode) {
  switch (mode) {
    case BlendMode::ScalarCenter: return "center";
    case BlendMode::ScalarIntegrated: return "integrated";
    case BlendMode::GaussianBlending: return "gb";
    case BlendMode::Supersample: return "ss";
  }
  return "unknown";
}

BlendMode parse_blend_mode(std::string_view name) {
  if (name == "center" || name == "scalar-center") return BlendMode::ScalarCenter;
  if (name == "integrated" || name == "scalar-integrated") return BlendMode::ScalarIntegrated;
  if (name == "gb" || name == "gaussian-blending") return BlendMode::GaussianBlending;
  if (name == "ss" || name == "supersample") return BlendMode::Supersample;
  throw std::invalid_argument("unknown blend mode '" + std::string(name) + "'");
}

double default_lowpass(BlendMode mode) { return mode == BlendMode::ScalarCenter ? 0.3 : 0.0; }

TransmittanceWindow init_window(Vec2 pixel_center) { return {pixel_center, {1.0, 1.0}, 1.0}; }

SplatFrame to_splat_frame(const TransmittanceWindow& win, const ProjectedSplat& splat,
                          const Eigen2& eig) {
  SplatFrame f;
  // Pair the window's x side with whichever eigen-axis is within 45 degrees
  // of screen x.
  f.swapped = std::abs(eig.e1.x) < std::abs(eig.e1.y);
  if (f.swapped) {
    f.axis_u = eig.e2;
    f.axis_v = eig.e1;
    f.sigma1 = std::sqrt(eig.lambda2);
    f.sigma2 = std::sqrt(eig.lambda1);
  } else {
    f.axis_u = eig.e1;
    f.axis_v = eig.e2;
    f.sigma1 = std::sqrt(eig.lambda1);
    f.sigma2 = std::sqrt(eig.lambda2);
  }
  const Vec2 d = win.center - splat.mu2d;
  f.u = dot(d, f.axis_u);
  f.v = dot(d, f.axis_v);
  f.u1 = f.u - 0.5 * win.sides.x;
  f.u2 = f.u + 0.5 * win.sides.x;
  f.v1 = f.v - 0.5 * win.sides.y;
  f.v2 = f.v + 0.5 * win.sides.y;
  return f;
}

double integrated_weight(const SplatFrame& frame, double t, double o) {
  if (o == 0.0 || t == 0.0) return 0.0;
  return t * o * gaussian_mass(frame.sigma1, frame.u1, frame.u2) *
         gaussian_mass(frame.sigma2, frame.v1, frame.v2);
}

namespace {

// Moments of the remaining transmittance taken about the window center
// rather than the splat mean, which keeps the dominant uniform term exact.
struct CenteredMoments {
  double weight = 0.0;
  double m0 = 0.0;
  Vec2 d1;  // first moment about the window center
  Vec2 c2;  // second moment about the window center
};

CenteredMoments centered_moments(const SplatFrame& f, double t, double o) {
  const double lu = f.u2 - f.u1;
  const double lv = f.v2 - f.v1;
  const double box = t * lu * lv;

  const Moments1D mu = gaussian_moments(f.sigma1, f.u1, f.u2);
  const Moments1D mv = gaussian_moments(f.sigma2, f.v1, f.v2);
  // Gaussian moments about the window center: \int (x - c)^k g(x) dx.
  const double j1u = mu.i1 - f.u * mu.i0;
  const double j2u = mu.i2 - 2.0 * f.u * mu.i1 + f.u * f.u * mu.i0;
  const double j1v = mv.i1 - f.v * mv.i0;
  const double j2v = mv.i2 - 2.0 * f.v * mv.i1 + f.v * f.v * mv.i0;

  const double to = t * o;
  CenteredMoments m;
  m.weight = to * mu.i0 * mv.i0;
  m.m0 = box - m.weight;
  m.d1 = {-to * j1u * mv.i0, -to * mu.i0 * j1v};
  m.c2 = {box * lu * lu / 12.0 - to * j2u * mv.i0, box * lv * lv / 12.0 - to * mu.i0 * j2v};
  return m;
}

bool outside_guard(double side, double sigma) {
  return !(side >= kGuardLow * sigma && side <= kGuardHigh * sigma);
}

}  // namespace

GaussianMoments compute_moments(const SplatFrame& frame, double t, double o) {
  const CenteredMoments c = centered_moments(frame, t, o);
  GaussianMoments g;
  g.m0 = std::max(c.m0, 0.0);
  g.m1 = {c.d1.x + frame.u * c.m0, c.d1.y + frame.v * c.m0};
  g.m2 = {c.c2.x + 2.0 * frame.u * c.d1.x + frame.u * frame.u * c.m0,
          c.c2.y + 2.0 * frame.v * c.d1.y + frame.v * frame.v * c.m0};
  return g;
}

WindowUpdate update_window(const TransmittanceWindow& win, const ProjectedSplat& splat,
                           const Eigen2& eig) {
  WindowUpdate out;
  out.next = win;
  const double o = splat.opacity;
  if (o == 0.0 || win.value == 0.0) return out;

  const SplatFrame f = to_splat_frame(win, splat, eig);
  const double side_u = f.u2 - f.u1;
  const double side_v = f.v2 - f.v1;

  if (outside_guard(side_u, f.sigma1) || outside_guard(side_v, f.sigma2)) {
    const double ru = f.u / f.sigma1;
    const double rv = f.v / f.sigma2;
    const double alpha = o * std::exp(-0.5 * (ru * ru + rv * rv));
    out.weight = win.value * alpha * win.sides.x * win.sides.y;
    out.next.value = win.value * (1.0 - alpha);
    out.fallback = true;
    return out;
  }

  const CenteredMoments m = centered_moments(f, win.value, o);
  out.weight = m.weight;
  if (!(m.m0 > 0.0)) {
    out.next.value = 0.0;
    return out;
  }

  const double mean_u = m.d1.x / m.m0;
  const double mean_v = m.d1.y / m.m0;
  const double var_u = std::max(m.c2.x / m.m0 - mean_u * mean_u, 0.0);
  const double var_v = std::max(m.c2.y / m.m0 - mean_v * mean_v, 0.0);
  double new_u = std::max(std::sqrt(12.0 * var_u), kMinWindowSide);
  double new_v = std::max(std::sqrt(12.0 * var_v), kMinWindowSide);
  double value = m.m0 / (new_u * new_v);
  if (value > 1.0) {
    // Only reachable through the variance clamp; widen the box instead of
    // letting the value leave [0, 1], which keeps the mass exact.
    const double grow = std::sqrt(value);
    new_u *= grow;
    new_v *= grow;
    value = m.m0 / (new_u * new_v);
  }

  out.next.center = win.center + f.axis_u * mean_u + f.axis_v * mean_v;
  out.next.sides = {new_u, new_v};
  out.next.value = std::min(value, 1.0);  // widening can leave 1 + ulp
  return out;
}

double point_alpha(const ProjectedSplat& splat, Vec2 p) {
  return splat.opacity * std::exp(-0.5 * quad_form(splat.conic, p - splat.mu2d));
}

double scalar_alpha_center(Vec2 pixel_center, const ProjectedSplat& splat) {
  return std::min(point_alpha(splat, pixel_center), kLegacyAlphaMax);
}

double scalar_alpha_integrated(Vec2 pixel, const ProjectedSplat& splat, const Eigen2& eig) {
  const TransmittanceWindow w = init_window(pixel + Vec2{0.5, 0.5});
  return integrated_weight(to_splat_frame(w, splat, eig), 1.0, splat.opacity);
}

SampleSplat to_sample_splat(const ProjectedSplat& s) {
  return {s.mu2d.x, s.mu2d.y, s.conic.xx, s.conic.xy, s.conic.yy,
          s.opacity, s.color.r, s.color.g, s.color.b};
}

namespace {

template <typename Get>
PixelResult blend_scalar(std::size_t n, Get get, Vec2 pixel, const BlendSettings& st) {
  const Vec2 center = pixel + Vec2{0.5, 0.5};
  const bool integrated = st.mode == BlendMode::ScalarIntegrated;
  PixelResult res;
  double t = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ProjectedSplat& s = get(i);
    double alpha = integrated ? scalar_alpha_integrated(pixel, s, s.eig) : point_alpha(s, center);
    if (st.legacy_alpha_clamp) {
      if (alpha < kLegacyAlphaMin) continue;
      alpha = std::min(alpha, kLegacyAlphaMax);
    }
    const double w = alpha * t;
    res.color += s.color * w;
    t -= w;
    ++res.blended;
    if (t < st.epsilon) break;
  }
  res.residual = t;
  return res;
}

template <typename Get>
PixelResult blend_gaussian(std::size_t n, Get get, Vec2 pixel, const BlendSettings& st) {
  TransmittanceWindow win = init_window(pixel + Vec2{0.5, 0.5});
  PixelResult res;
  for (std::size_t i = 0; i < n; ++i) {
    const ProjectedSplat& s = get(i);
    const WindowUpdate u = update_window(win, s, s.eig);
    res.color += s.color * u.weight;
    win = u.next;
    ++res.blended;
    if (win.mass() < st.epsilon) break;
  }
  res.residual = win.mass();
  return res;
}

template <typename Get>
PixelResult blend_supersample(std::size_t n, Get get, Vec2 pixel, const BlendSettings& st) {
  if (st.supersample_k < 1) throw std::invalid_argument("supersample K must be >= 1");
  const std::size_t k = static_cast<std::size_t>(st.supersample_k);
  thread_local std::vector<SampleSplat> splats;
  thread_local std::vector<double> xs, ys, r, g, b, t;
  splats.clear();
  for (std::size_t i = 0; i < n; ++i) splats.push_back(to_sample_splat(get(i)));
  xs.resize(k);
  ys.resize(k);
  r.resize(k);
  g.resize(k);
  b.resize(k);
  t.resize(k);

  const double step = 1.0 / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) xs[i] = pixel.x + (static_cast<double>(i) + 0.5) * step;

  CompositeParams params;
  params.epsilon = st.epsilon;
  params.legacy_clamp = false;

  // Row sums first, then rows, so the summation order is fixed.
  Rgb total;
  double total_t = 0.0;
  for (std::size_t row = 0; row < k; ++row) {
    std::fill(ys.begin(), ys.end(), pixel.y + (static_cast<double>(row) + 0.5) * step);
    composite_samples(splats, xs, ys, params, {r, g, b, t});
    Rgb row_sum;
    double row_t = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      row_sum += Rgb{r[i], g[i], b[i]};
      row_t += t[i];
    }
    total += row_sum;
    total_t += row_t;
  }
  const double inv = 1.0 / static_cast<double>(k * k);
  PixelResult res;
  res.color = total * inv;
  res.residual = total_t * inv;
  res.blended = n;
  return res;
}

template <typename Get>
PixelResult blend_any(std::size_t n, Get get, int px, int py, const BlendSettings& st) {
  const Vec2 pixel{static_cast<double>(px), static_cast<double>(py)};
  PixelResult res;
  switch (st.mode) {
    case BlendMode::ScalarCenter:
    case BlendMode::ScalarIntegrated: res = blend_scalar(n, get, pixel, st); break;
    case BlendMode::GaussianBlending: res = blend_gaussian(n, get, pixel, st); break;
    case BlendMode::Supersample: res = blend_supersample(n, get, pixel, st); break;
  }
  res.color += st.background * res.residual;
  return res;
}

}  // namespace

PixelResult blend_pixel(std::span<const ProjectedSplat> sorted, int px, int py,
                        const BlendSettings& settings) {
  return blend_any(
      sorted.size(), [&](std::size_t i) -> const ProjectedSplat& { return sorted[i]; }, px, py,
      settings);
}

PixelResult blend_pixel(std::span<const ProjectedSplat> splats, std::span<const std::uint32_t> order,
                        int px, int py, const BlendSettings& settings) {
  return blend_any(
      order.size(), [&](std::size_t i) -> const ProjectedSplat& { return splats[order[i]]; }, px,
      py, settings);
}

}  // namespace gblend
