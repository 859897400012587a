#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gblend/math.hpp"
#include "gblend/synth.hpp"
#include "quadrature.hpp"

namespace gblend {
namespace {

// 40-digit mpmath values.
struct ErfFixture {
  double x, erf, erfc;
};
constexpr ErfFixture kErf[] = {
    {0.0, 0.0, 1.0},
    {0.1, 0.1124629160182848922, 0.8875370839817151078},
    {0.46875, 0.49261347321793799159, 0.50738652678206200841},
    {0.5, 0.52049987781304653768, 0.47950012218695346232},
    {1.0, 0.84270079294971486934, 0.15729920705028513066},
    {2.0, 0.99532226501895273416, 0.0046777349810472658379},
    {4.0, 0.99999998458274209972, 1.5417257900280018852e-8},
    {-3.0, -0.99997790950300141456, 1.9999779095030014146},
    {6.0, 0.99999999999999997848, 2.1519736712498913117e-17},
    {10.0, 1.0, 2.088487583762544757e-45},
};

TEST(Erf, MatchesHighPrecisionValues) {
  for (const auto& f : kErf) {
    EXPECT_NEAR(erf(f.x), f.erf, 2e-16) << f.x;
    EXPECT_NEAR(erfc(f.x), f.erfc, 4e-16 * f.erfc) << f.x;
  }
}

TEST(Erf, OddSymmetryAndComplement) {
  for (double x = -6.0; x <= 6.0; x += 0.037) {
    EXPECT_EQ(erf(-x), -erf(x));
    EXPECT_NEAR(erf(x) + erfc(x), 1.0, 1e-15);
  }
}

TEST(Erf, AgreesWithStd) {
  for (double x = -8.0; x <= 8.0; x += 0.0123) {
    EXPECT_NEAR(erf(x), std::erf(x), 4e-16);
    EXPECT_NEAR(erfc(x), std::erfc(x), 1e-15 * std::erfc(x) + 1e-300);
  }
}

struct MomentFixture {
  int k;
  double sigma, a, b, value;
};
constexpr MomentFixture kMoments[] = {
    {0, 1.0, -1.0, 1.0, 1.7112487837842976063},
    {1, 1.0, -1.0, 2.0, 0.47119537647602073171},
    {2, 1.0, -1.0, 2.0, 1.1747111790288981987},
    {0, 0.01, -0.05, 0.1, 0.025066275561020655148},
    {2, 1000.0, -5000.0, 3000.0, 2469898240.6475254222},
    {1, 2.0, 3.0, 10.0, 1.2985949628207106045},
    {2, 0.5, 2.0, 4.0, 0.00017765481772234365264},
    {0, 3.0, -30.0, -25.0, 2.9552189872515057604e-16},
    {2, 1.0, -0.001, 0.002, 2.9999967000023037576e-9},
};

TEST(GaussianMoment, MatchesHighPrecisionValues) {
  for (const auto& f : kMoments)
    EXPECT_NEAR(gaussian_moment(f.k, f.sigma, f.a, f.b), f.value, 1e-13 * std::abs(f.value))
        << "k=" << f.k << " sigma=" << f.sigma << " [" << f.a << ", " << f.b << "]";
}

TEST(GaussianMoment, FullLineValues) {
  const double s = 1.7;
  const double root = std::sqrt(2.0 * std::numbers::pi);
  EXPECT_NEAR(gaussian_moment(0, s, -60.0, 60.0), root * s, 1e-14);
  EXPECT_NEAR(gaussian_moment(1, s, -60.0, 60.0), 0.0, 1e-14);
  EXPECT_NEAR(gaussian_moment(2, s, -60.0, 60.0), root * s * s * s, 1e-13);
}

TEST(GaussianMoment, EmptyIntervalIsZero) {
  for (int k = 0; k <= 2; ++k) EXPECT_EQ(gaussian_moment(k, 0.7, 0.3, 0.3), 0.0);
}

TEST(GaussianMoment, ReversedBoundsThrow) {
  for (int k = 0; k <= 2; ++k) EXPECT_THROW(gaussian_moment(k, 0.9, 1.2, -0.4), std::invalid_argument);
}

TEST(GaussianMoment, RejectsBadArguments) {
  EXPECT_THROW(gaussian_moment(3, 1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gaussian_moment(0, 0.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gaussian_moment(0, -1.0, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gaussian_moment(0, 1.0, NAN, 1.0), std::invalid_argument);
}

TEST(GaussianMoment, FarTailKeepsRelativeAccuracy) {
  // Both bounds deep in the tail: naive erf differences cancel to zero.
  const double v = gaussian_moment(0, 1.0, 9.0, 9.5);
  EXPECT_GT(v, 0.0);
  EXPECT_NEAR(v, oracle::moment(0, 1.0, 9.0, 9.5), 1e-12 * v);
}

TEST(GaussianMoment, RandomizedAgainstQuadrature) {
  SynthRng rng(11);
  for (int i = 0; i < 500; ++i) {
    const int k = static_cast<int>(rng.uniform() * 3.0);
    const double sigma = std::exp(rng.uniform(std::log(1e-2), std::log(1e3)));
    double a = rng.uniform(-10.0, 10.0) * sigma, b = rng.uniform(-10.0, 10.0) * sigma;
    if (a > b) std::swap(a, b);
    const double scale = oracle::abs_moment(k, sigma, a, b);
    if (scale == 0.0) continue;
    EXPECT_LE(std::abs(gaussian_moment(k, sigma, a, b) - oracle::moment(k, sigma, a, b)), 1e-9 * scale)
        << "k=" << k << " sigma=" << sigma << " [" << a << ", " << b << "]";
  }
}

TEST(GaussianMoments, BatchMatchesSingle) {
  const Moments1D m = gaussian_moments(0.8, -0.3, 1.1);
  EXPECT_DOUBLE_EQ(m.i0, gaussian_moment(0, 0.8, -0.3, 1.1));
  EXPECT_DOUBLE_EQ(m.i1, gaussian_moment(1, 0.8, -0.3, 1.1));
  EXPECT_DOUBLE_EQ(m.i2, gaussian_moment(2, 0.8, -0.3, 1.1));
}

TEST(Eigen2x2, DiagonalAndIdentity) {
  const auto d = eigen2x2({4.0, 0.0, 1.0});
  ASSERT_TRUE(d);
  EXPECT_DOUBLE_EQ(d->lambda1, 4.0);
  EXPECT_DOUBLE_EQ(d->lambda2, 1.0);
  EXPECT_EQ(d->e1, (Vec2{1.0, 0.0}));

  const auto id = eigen2x2({1.0, 0.0, 1.0});
  ASSERT_TRUE(id);
  EXPECT_DOUBLE_EQ(id->lambda1, 1.0);
  EXPECT_DOUBLE_EQ(id->lambda2, 1.0);
  EXPECT_EQ(id->e1, (Vec2{1.0, 0.0}));
  EXPECT_NEAR(dot(id->e1, id->e2), 0.0, 0.0);
}

TEST(Eigen2x2, RejectsNonPositiveDefinite) {
  EXPECT_FALSE(eigen2x2({1.0, 2.0, 1.0}));
  EXPECT_FALSE(eigen2x2({0.0, 0.0, 1.0}));
  EXPECT_FALSE(eigen2x2({-1.0, 0.0, -1.0}));
  EXPECT_FALSE(eigen2x2({NAN, 0.0, 1.0}));
  EXPECT_FALSE(eigen2x2({INFINITY, 0.0, 1.0}));
}

TEST(Eigen2x2, ReconstructsRandomMatrices) {
  SynthRng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double s1 = std::exp(rng.uniform(-6.0, 6.0)), s2 = std::exp(rng.uniform(-6.0, 6.0));
    const double th = rng.uniform(0.0, std::numbers::pi);
    const double c = std::cos(th), s = std::sin(th);
    const SymMat2 m{s1 * c * c + s2 * s * s, (s1 - s2) * c * s, s1 * s * s + s2 * c * c};
    const auto e = eigen2x2(m);
    ASSERT_TRUE(e);
    EXPECT_GE(e->lambda1, e->lambda2);
    EXPECT_GT(e->lambda2, 0.0);
    EXPECT_NEAR(norm(e->e1), 1.0, 1e-14);
    EXPECT_NEAR(dot(e->e1, e->e2), 0.0, 1e-14);
    const SymMat2 r = reconstruct(*e);
    const double scale = std::max(s1, s2);
    EXPECT_NEAR(r.xx, m.xx, 1e-13 * scale);
    EXPECT_NEAR(r.xy, m.xy, 1e-13 * scale);
    EXPECT_NEAR(r.yy, m.yy, 1e-13 * scale);
    // The determinant of m loses digits to cancellation at scale^2.
    EXPECT_NEAR(e->lambda1 * e->lambda2, m.xx * m.yy - m.xy * m.xy, 1e-14 * scale * scale);
  }
}

TEST(Eigen2x2, TinyEigenvalueKeepsRelativeAccuracy) {
  // det = 1e-12 exactly; a naive (trace - sqrt) formula loses every digit.
  const auto e = eigen2x2({1.0, 0.0, 1e-12});
  ASSERT_TRUE(e);
  EXPECT_NEAR(e->lambda2, 1e-12, 1e-26);
}

TEST(Inverse, TimesSelfIsIdentity) {
  const SymMat2 m{2.0, 0.7, 1.3};
  const SymMat2 inv = inverse(m);
  EXPECT_NEAR(m.xx * inv.xx + m.xy * inv.xy, 1.0, 1e-15);
  EXPECT_NEAR(m.xx * inv.xy + m.xy * inv.yy, 0.0, 1e-15);
  EXPECT_NEAR(m.xy * inv.xy + m.yy * inv.yy, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(quad_form(SymMat2{1.0, 0.0, 1.0}, {3.0, 4.0}), 25.0);
}

}  // namespace
}  // namespace gblend
