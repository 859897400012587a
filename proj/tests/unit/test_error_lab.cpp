#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gblend/error_lab.hpp"
#include "gblend/synth.hpp"

namespace gblend {
namespace {

// mpmath 2D quadrature of (1 - g1)(1 - g2) over [-0.5, 0.5]^2, centers
// (mu_x, -0.1) and (mu_x, 0.1), unit opacities.
struct TrueT {
  double mu_x, sigma, value;
};
constexpr TrueT kTrueT[] = {
    {0.5, 1.0, 0.047126680994807949399},
    {0.0, 1.0, 0.008477417020414552254},
    {0.0, 0.3, 0.33746775539552938347},
    {2.0, 0.5, 0.99715323366396739633},
};

TEST(TrueTransmittance, MatchesHighPrecisionValues) {
  for (const TrueT& f : kTrueT) {
    const IsoSplat2D s[2] = {{{f.mu_x, -0.1}, f.sigma, 1.0}, {{f.mu_x, 0.1}, f.sigma, 1.0}};
    EXPECT_NEAR(true_residual_transmittance(s), f.value, 1e-13);
  }
}

TEST(TrueTransmittance, TrivialCases) {
  EXPECT_EQ(true_residual_transmittance({}), 1.0);
  const IsoSplat2D far[1] = {{{40.0, 0.0}, 1.0, 1.0}};
  EXPECT_NEAR(true_residual_transmittance(far), 1.0, 1e-15);
  PixelBox big{0.0, 0.0, 2.0, 3.0};
  EXPECT_EQ(true_residual_transmittance({}, big), 6.0);
}

TEST(TrueTransmittance, ClosedFormMatchesQuadrature) {
  SynthRng rng(12);
  for (int i = 0; i < 40; ++i) {
    std::vector<IsoSplat2D> s;
    const int n = 1 + i % 4;
    for (int j = 0; j < n; ++j)
      s.push_back({{rng.uniform(-1, 1), rng.uniform(-1, 1)}, std::exp(rng.uniform(-2.5, 1.0)), rng.uniform(0.1, 1.0)});
    EXPECT_NEAR(true_residual_transmittance(s), quadrature_residual_transmittance(s), 1e-10) << i;
  }
}

TEST(TrueTransmittance, ManySplatsUseQuadrature) {
  std::vector<IsoSplat2D> s(kClosedFormMax + 1, IsoSplat2D{{0.0, 0.0}, 1e4, 0.1});
  EXPECT_NEAR(true_residual_transmittance(s), std::pow(0.9, static_cast<double>(s.size())), 1e-6);
}

TEST(Sweep, GridShapes) {
  SweepConfig c;
  EXPECT_EQ(c.grid().size(), 121u);
  EXPECT_DOUBLE_EQ(c.grid().back(), 3.0);
  const SweepConfig s = SweepConfig::sigma_sweep();
  const auto g = s.grid();
  EXPECT_EQ(g.size(), 101u);
  EXPECT_NEAR(g.front(), 0.05, 1e-15);
  EXPECT_NEAR(g.back(), 5.0, 1e-12);

  c.start = c.stop = 0.25;
  c.modes = {BlendMode::GaussianBlending};
  const SweepTable t = run_sweep(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].value, 0.25);

  c.step = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.stop = -4.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Sweep, FarSplatsHaveNoError) {
  SweepConfig c;
  c.supersample_k = 32;
  for (BlendMode m : c.modes) EXPECT_NEAR(transmittance_error(m, c, {6.0, 1.0}).delta(), 0.0, 1e-6);
}

TEST(Sweep, ScalarModesDilateOnOverlap) {
  SweepConfig c;
  for (BlendMode m : {BlendMode::ScalarCenter, BlendMode::ScalarIntegrated})
    EXPECT_LT(transmittance_error(m, c, {0.5, 1.0}).delta(), 0.0) << to_string(m);
}

TEST(Sweep, GbExactInFlatLimit) {
  SweepConfig c;
  c.opacity1 = 0.5;
  c.opacity2 = 0.3;
  const TransmittanceSample s = transmittance_error(BlendMode::GaussianBlending, c, {0.0, 1e4});
  EXPECT_NEAR(s.delta(), 0.0, 1e-6);
  EXPECT_NEAR(s.t_true, 0.35, 1e-6);
}

TEST(Sweep, RowOrderIsDeterministic) {
  SweepConfig c;
  c.start = -1.0;
  c.stop = 1.0;
  c.step = 0.25;
  c.supersample_k = 8;
  c.threads = 1;
  const SweepTable a = run_sweep(c);
  c.threads = 4;
  const SweepTable b = run_sweep(c);
  ASSERT_EQ(a.rows.size(), 9u * 4u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].value, b.rows[i].value);
    EXPECT_EQ(a.rows[i].mode, b.rows[i].mode);
    EXPECT_EQ(a.rows[i].delta_t, b.rows[i].delta_t);
  }
  EXPECT_EQ(a.rows[4].mode, c.modes[0]);
  EXPECT_EQ(a.rows[4].value, -0.75);
}

TEST(Sweep, CsvFormat) {
  SweepTable t;
  t.variable = SweepVar::Sigma;
  t.rows = {{0.5, BlendMode::GaussianBlending, -0.25}, {0.5, BlendMode::ScalarCenter, 1e-3}};
  std::ostringstream os;
  write_sweep_csv(os, t);
  EXPECT_EQ(os.str(), "sweep_var,value,mode,delta_t\nsigma,0.5,gb,-0.25\nsigma,0.5,center,0.001\n");
  const auto sum = t.summary();
  ASSERT_EQ(sum.size(), 2u);
  EXPECT_EQ(sum[0].mode, BlendMode::GaussianBlending);
  EXPECT_DOUBLE_EQ(sum[0].mean_abs_delta, 0.25);
}

Framebuffer flat(int w, int h, double v) { return Framebuffer(w, h, {v, v, v}); }

TEST(Psnr, Basics) {
  EXPECT_EQ(psnr(flat(4, 4, 0.3), flat(4, 4, 0.3)), kPsnrCap);
  EXPECT_NEAR(psnr(flat(4, 4, 0.0), flat(4, 4, 1.0)), 0.0, 1e-15);
  EXPECT_THROW(psnr(flat(4, 4, 0.0), flat(4, 5, 0.0)), std::invalid_argument);
  // Values outside [0, 1] are clamped before comparison.
  EXPECT_EQ(psnr(flat(2, 2, 1.5), flat(2, 2, 1.0)), kPsnrCap);
}

TEST(Psnr, KnownNoiseVariance) {
  // Symmetric +-d noise around 0.5 has variance d^2 exactly.
  const double d = 0.03;
  Framebuffer a = flat(64, 64, 0.5), b = flat(64, 64, 0.5);
  SynthRng rng(1);
  for (Rgb& c : b.rgb) {
    c.r += rng.uniform() < 0.5 ? d : -d;
    c.g += rng.uniform() < 0.5 ? d : -d;
    c.b += rng.uniform() < 0.5 ? d : -d;
  }
  EXPECT_NEAR(psnr(a, b), -10.0 * std::log10(d * d), 0.1);
}

}  // namespace
}  // namespace gblend
