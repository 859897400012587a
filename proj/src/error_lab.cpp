#include "gblend/error_lab.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gblend {

namespace {

// o_S prod_{j in S} exp(-|x - mu_j|^2 / (2 sigma_j^2)) integrated over the
// box. The product is o_S K exp(-|x - m|^2 / (2 s^2)) with precision-weighted
// mean m and 1/s^2 = sum 1/sigma_j^2.
double product_term(std::span<const IsoSplat2D> splats, unsigned subset, const PixelBox& box) {
  double precision = 0.0, opacity = 1.0;
  Vec2 weighted;
  for (std::size_t j = 0; j < splats.size(); ++j) {
    if (!(subset >> j & 1u)) continue;
    const double p = 1.0 / (splats[j].sigma * splats[j].sigma);
    precision += p;
    weighted = weighted + splats[j].mu * p;
    opacity *= splats[j].opacity;
  }
  const Vec2 m = weighted * (1.0 / precision);
  double exponent = 0.0;
  for (std::size_t j = 0; j < splats.size(); ++j) {
    if (!(subset >> j & 1u)) continue;
    const Vec2 d = splats[j].mu - m;
    exponent += dot(d, d) / (splats[j].sigma * splats[j].sigma);
  }
  const double s = 1.0 / std::sqrt(precision);
  return opacity * std::exp(-0.5 * exponent) * gaussian_mass(s, box.x0 - m.x, box.x1 - m.x) *
         gaussian_mass(s, box.y0 - m.y, box.y1 - m.y);
}

double transmittance_at(std::span<const IsoSplat2D> splats, double x, double y) {
  double t = 1.0;
  for (const IsoSplat2D& s : splats) {
    const double dx = x - s.mu.x, dy = y - s.mu.y;
    t *= 1.0 - s.opacity * std::exp(-0.5 * (dx * dx + dy * dy) / (s.sigma * s.sigma));
  }
  return t;
}

// Interval [a, b] split at every splat center that falls inside it, so
// narrow peaks are never straddled by a single initial panel.
std::vector<double> breakpoints(double a, double b, std::span<const IsoSplat2D> splats, bool use_x) {
  std::vector<double> pts{a, b};
  for (const IsoSplat2D& s : splats) {
    const double c = use_x ? s.mu.x : s.mu.y;
    if (c > a && c < b) pts.push_back(c);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

template <class F>
double integrate_pieces(F f, const std::vector<double>& pts, double tol) {
  using Gk = boost::math::quadrature::gauss_kronrod<double, 31>;
  double sum = 0.0;
  // Each piece is mapped onto [-1, 1]: Boost judges its unscaled error
  // estimate against the scaled result, which never converges on narrow pieces.
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]), half = 0.5 * (pts[i + 1] - pts[i]);
    sum += half * Gk::integrate([&](double t) { return f(mid + half * t); }, -1.0, 1.0, 15, tol);
  }
  return sum;
}

// Composite 30-point Gauss-Legendre with panels no wider than half the
// narrowest sigma. Deterministic in its inputs, so the outer adaptive rule
// sees a smooth integrand instead of the step noise of nested adaptivity.
template <class F>
double integrate_panels(F f, const std::vector<double>& pts, double min_sigma) {
  using Gl = boost::math::quadrature::gauss<double, 30>;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double len = pts[i + 1] - pts[i];
    const int panels = std::max(1, static_cast<int>(std::ceil(len / (0.5 * min_sigma))));
    const double h = len / panels;
    for (int p = 0; p < panels; ++p) sum += Gl::integrate(f, pts[i] + p * h, pts[i] + (p + 1) * h);
  }
  return sum;
}

}  // namespace

double true_residual_transmittance(std::span<const IsoSplat2D> splats, const PixelBox& box) {
  if (splats.size() > kClosedFormMax) return quadrature_residual_transmittance(splats, box);
  const double area = (box.x1 - box.x0) * (box.y1 - box.y0);
  double sum = area;
  const unsigned subsets = 1u << splats.size();
  for (unsigned s = 1; s < subsets; ++s) {
    const double term = product_term(splats, s, box);
    sum += (std::popcount(s) % 2 == 1) ? -term : term;
  }
  return sum;
}

double quadrature_residual_transmittance(std::span<const IsoSplat2D> splats, const PixelBox& box,
                                         double tol) {
  const std::vector<double> xs = breakpoints(box.x0, box.x1, splats, true);
  const std::vector<double> ys = breakpoints(box.y0, box.y1, splats, false);
  double min_sigma = INFINITY;
  for (const IsoSplat2D& s : splats) min_sigma = std::min(min_sigma, s.sigma);
  auto row = [&](double y) {
    return integrate_panels([&](double x) { return transmittance_at(splats, x, y); }, xs, min_sigma);
  };
  return integrate_pieces(row, ys, tol);
}

std::string_view to_string(SweepVar v) { return v == SweepVar::MuX ? "mu_x" : "sigma"; }

SweepConfig SweepConfig::mu_sweep() { return SweepConfig{}; }

SweepConfig SweepConfig::sigma_sweep() {
  SweepConfig c;
  c.variable = SweepVar::Sigma;
  c.start = 0.05;
  c.stop = 5.0;
  c.step = 0.02;  // decades: 101 points
  c.log_spaced = true;
  c.mu_x = 0.5;
  return c;
}

void SweepConfig::validate() const {
  if (modes.empty()) throw std::invalid_argument("sweep needs at least one mode");
  if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
  if (!(stop >= start)) throw std::invalid_argument("sweep range is empty");
  if (log_spaced && !(start > 0.0)) throw std::invalid_argument("log sweep needs a positive start");
  if (variable == SweepVar::MuX && !(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (variable == SweepVar::Sigma && !(start > 0.0))
    throw std::invalid_argument("sigma sweep needs a positive start");
  if (supersample_k < 1) throw std::invalid_argument("supersample K must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
}

std::vector<double> SweepConfig::grid() const {
  validate();
  const double lo = log_spaced ? std::log10(start) : start;
  const double hi = log_spaced ? std::log10(stop) : stop;
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    g[i] = log_spaced ? std::pow(10.0, v) : v;
  }
  return g;
}

TransmittanceSample transmittance_error(BlendMode mode, const SweepConfig& cfg, SweepPoint p) {
  const IsoSplat2D truth[2] = {{{p.mu_x, -cfg.offset_y}, p.sigma, cfg.opacity1},
                               {{p.mu_x, cfg.offset_y}, p.sigma, cfg.opacity2}};
  TransmittanceSample out;
  out.t_true = true_residual_transmittance(truth);

  // Pixel (0, 0) covers [0, 1]^2, so shift the scene by +0.5.
  const double var = p.sigma * p.sigma + (cfg.mode_lowpass ? default_lowpass(mode) : 0.0);
  std::vector<ProjectedSplat> splats;
  for (int i = 0; i < 2; ++i) {
    const auto s = make_splat_2d(truth[i].mu + Vec2{0.5, 0.5}, {var, 0.0, var}, truth[i].opacity,
                                 {1.0, 1.0, 1.0}, 1.0 + i);
    if (!s) throw std::invalid_argument("degenerate sweep splat");
    splats.push_back(*s);
  }
  BlendSettings st;
  st.mode = mode;
  st.supersample_k = cfg.supersample_k;
  st.epsilon = cfg.epsilon;
  st.legacy_alpha_clamp = cfg.legacy_alpha_clamp;
  out.t_mode = blend_pixel(splats, 0, 0, st).residual;
  return out;
}

std::vector<double> SweepTable::deltas(BlendMode mode) const {
  std::vector<double> d;
  for (const SweepRow& r : rows)
    if (r.mode == mode) d.push_back(r.delta_t);
  return d;
}

std::vector<SweepSummary> SweepTable::summary() const {
  std::vector<SweepSummary> out;
  for (const SweepRow& r : rows) {
    if (std::none_of(out.begin(), out.end(), [&](const SweepSummary& s) { return s.mode == r.mode; }))
      out.push_back({r.mode, 0.0});
  }
  for (SweepSummary& s : out) {
    const std::vector<double> d = deltas(s.mode);
    double sum = 0.0;
    for (double v : d) sum += std::abs(v);
    s.mean_abs_delta = d.empty() ? 0.0 : sum / static_cast<double>(d.size());
  }
  return out;
}

SweepTable run_sweep(const SweepConfig& cfg) {
  const std::vector<double> grid = cfg.grid();
  const std::size_t n_modes = cfg.modes.size();
  SweepTable table;
  table.variable = cfg.variable;
  table.rows.resize(grid.size() * n_modes);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < grid.size();) {
      SweepPoint p{cfg.mu_x, cfg.sigma};
      (cfg.variable == SweepVar::MuX ? p.mu_x : p.sigma) = grid[i];
      for (std::size_t m = 0; m < n_modes; ++m) {
        const TransmittanceSample s = transmittance_error(cfg.modes[m], cfg, p);
        table.rows[i * n_modes + m] = {grid[i], cfg.modes[m], s.delta()};
      }
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, grid.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return table;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << "sweep_var,value,mode,delta_t\n";
  for (const SweepRow& r : table.rows)
    os << to_string(table.variable) << ',' << format_double(r.value) << ',' << to_string(r.mode) << ','
       << format_double(r.delta_t) << '\n';
  if (!os) throw std::runtime_error("failed to write sweep CSV");
}

void print_sweep_summary(std::ostream& os, const SweepTable& table) {
  os << "mean |dT| over " << to_string(table.variable) << " sweep\n";
  for (const SweepSummary& s : table.summary())
    os << "  " << to_string(s.mode) << ": " << format_double(s.mean_abs_delta) << '\n';
}

namespace {

void require_same_size(const Framebuffer& a, const Framebuffer& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("image dimensions differ: " + std::to_string(a.width) + "x" +
                                std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                std::to_string(b.height));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

double mse(const Framebuffer& a, const Framebuffer& b) {
  require_same_size(a, b);
  if (a.rgb.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double dr = clamp01(a.rgb[i].r) - clamp01(b.rgb[i].r);
    const double dg = clamp01(a.rgb[i].g) - clamp01(b.rgb[i].g);
    const double db = clamp01(a.rgb[i].b) - clamp01(b.rgb[i].b);
    sum += dr * dr + dg * dg + db * db;
  }
  return sum / (3.0 * static_cast<double>(a.rgb.size()));
}

double psnr(const Framebuffer& a, const Framebuffer& b) {
  const double e = mse(a, b);
  if (e <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(e));
}

}  // namespace gblend
