#include "gblend/math.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace gblend {
namespace {

// W. J. Cody, "Rational Chebyshev approximations for the error function",
// Math. Comp. 23 (1969). Coefficients from the netlib SPECFUN CALERF routine.
constexpr std::array<double, 5> kErfA = {3.16112374387056560e00, 1.13864154151050156e02,
                                         3.77485237685302021e02, 3.20937758913846947e03,
                                         1.85777706184603153e-1};
constexpr std::array<double, 4> kErfB = {2.36012909523441209e01, 2.44024637934444173e02,
                                         1.28261652607737228e03, 2.84423683343917062e03};
constexpr std::array<double, 9> kErfcC = {
    5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
    2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
    2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
constexpr std::array<double, 8> kErfcD = {
    1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
    1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
    3.43936767414372164e03, 1.23033935480374942e03};
constexpr std::array<double, 6> kErfcP = {3.05326634961232344e-1, 3.60344899949804439e-1,
                                          1.25781726111229246e-1, 1.60837851487422766e-2,
                                          6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr std::array<double, 5> kErfcQ = {2.56852019228982242e00, 1.87295284992346047e00,
                                          5.27905102951428412e-1, 6.05183413124413191e-2,
                                          2.33520497626869185e-3};

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kSmallThresh = 0.46875;
constexpr double kXSmall = 1.11e-16;
constexpr double kXBig = 26.543;

// erf(y) for 0 <= y <= 0.46875.
double erf_small(double y) {
  const double ysq = y > kXSmall ? y * y : 0.0;
  double num = kErfA[4] * ysq;
  double den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = (num + kErfA[i]) * ysq;
    den = (den + kErfB[i]) * ysq;
  }
  return y * (num + kErfA[3]) / (den + kErfB[3]);
}

// exp(-y^2) evaluated as exp(-ysq^2) exp(-del) with ysq = y truncated to 1/16,
// which keeps the exponent's rounding error out of the tail.
double exp_neg_sq(double y) {
  const double ysq = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ysq) * (y + ysq);
  return std::exp(-ysq * ysq) * std::exp(-del);
}

// erfc(y) for y > 0.46875.
double erfc_large(double y) {
  if (y <= 4.0) {
    double num = kErfcC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + kErfcC[i]) * y;
      den = (den + kErfcD[i]) * y;
    }
    return exp_neg_sq(y) * (num + kErfcC[7]) / (den + kErfcD[7]);
  }
  if (y >= kXBig) return 0.0;
  const double ysq = 1.0 / (y * y);
  double num = kErfcP[5] * ysq;
  double den = ysq;
  for (int i = 0; i < 4; ++i) {
    num = (num + kErfcP[i]) * ysq;
    den = (den + kErfcQ[i]) * ysq;
  }
  const double r = (kInvSqrtPi - ysq * (num + kErfcP[4]) / (den + kErfcQ[4])) / y;
  return exp_neg_sq(y) * r;
}

constexpr double kSqrtHalfPi = 1.2533141373155002512;  // sqrt(pi/2)
constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

// \int_0^x t^2 exp(-t^2/(2 s^2)) dt for 0 <= x <= s, by its power series.
double second_moment_series(double x, double sigma) {
  const double z = x * x / (2.0 * sigma * sigma);
  double term = 1.0;  // (-z)^n / n!
  double sum = 1.0 / 3.0;
  for (int n = 1; n < 40; ++n) {
    term *= -z / n;
    const double add = term / (2 * n + 3);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return x * x * x * sum;
}

double exp_half_sq(double x, double sigma) {
  const double r = x / sigma;
  return std::exp(-0.5 * r * r);
}

// I^2 over [a, b] with 0 <= a <= b.
double second_moment_nonneg(double sigma, double a, double b) {
  if (a >= sigma) {
    // Tail: I^0 + a e_a - b e_b, all three terms non-negative.
    const double tail = a * exp_half_sq(a, sigma) - b * exp_half_sq(b, sigma);
    return sigma * sigma * (gaussian_mass(sigma, a, b) + std::max(tail, 0.0));
  }
  const double mid = std::min(b, sigma);
  double result = second_moment_series(mid, sigma) - second_moment_series(a, sigma);
  if (b > sigma) result += second_moment_nonneg(sigma, sigma, b);
  return result;
}

// e^{-a^2/2s^2} - e^{-b^2/2s^2} without cancellation for close |a|, |b|.
double exp_difference(double sigma, double a, double b) {
  const double d = (b - a) * (b + a) / (2.0 * sigma * sigma);
  if (d >= 0.0) return -exp_half_sq(a, sigma) * std::expm1(-d);
  return exp_half_sq(b, sigma) * std::expm1(d);
}

}  // namespace

double erf(double x) {
  const double y = std::abs(x);
  double r;
  if (y <= kSmallThresh) {
    r = erf_small(y);
  } else {
    r = 1.0 - erfc_large(y);
  }
  return x < 0.0 ? -r : r;
}

double erfc(double x) {
  const double y = std::abs(x);
  if (y <= kSmallThresh) return 1.0 - (x < 0.0 ? -erf_small(y) : erf_small(y));
  const double tail = erfc_large(y);
  return x < 0.0 ? 2.0 - tail : tail;
}

double gaussian_mass(double sigma, double a, double b) {
  const double s = kInvSqrt2 / sigma;
  const double lo = a * s;
  const double hi = b * s;
  double diff;
  if (lo >= 0.0) {
    diff = hi <= kSmallThresh ? erf(hi) - erf(lo) : erfc(lo) - erfc(hi);
  } else if (hi <= 0.0) {
    diff = lo >= -kSmallThresh ? erf(hi) - erf(lo) : erfc(-hi) - erfc(-lo);
  } else {
    diff = erf(hi) - erf(lo);
  }
  return kSqrtHalfPi * sigma * std::max(diff, 0.0);
}

Moments1D gaussian_moments(double sigma, double a, double b) {
  Moments1D m;
  m.i0 = gaussian_mass(sigma, a, b);
  m.i1 = sigma * sigma * exp_difference(sigma, a, b);
  if (a >= 0.0) {
    m.i2 = second_moment_nonneg(sigma, a, b);
  } else if (b <= 0.0) {
    m.i2 = second_moment_nonneg(sigma, -b, -a);
  } else {
    m.i2 = second_moment_nonneg(sigma, 0.0, -a) + second_moment_nonneg(sigma, 0.0, b);
  }
  return m;
}

double gaussian_moment(int k, double sigma, double a, double b) {
  if (!std::isfinite(sigma) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("gaussian_moment: non-finite argument");
  if (sigma <= 0.0) throw std::invalid_argument("gaussian_moment: sigma must be positive");
  if (a > b) throw std::invalid_argument("gaussian_moment: lower bound exceeds upper bound");
  const Moments1D m = gaussian_moments(sigma, a, b);
  switch (k) {
    case 0: return m.i0;
    case 1: return m.i1;
    case 2: return m.i2;
    default: throw std::invalid_argument("gaussian_moment: order must be 0, 1 or 2");
  }
}

namespace {

// a*b - c*d with one rounding (Kahan).
double diff_of_products(double a, double b, double c, double d) {
  const double w = d * c;
  const double e = std::fma(-d, c, w);
  const double f = std::fma(a, b, -w);
  return f + e;
}

Vec2 canonical_sign(Vec2 v) {
  const bool flip = std::abs(v.x) >= std::abs(v.y) ? v.x < 0.0 : v.y < 0.0;
  return flip ? Vec2{-v.x, -v.y} : v;
}

}  // namespace

std::optional<Eigen2> eigen2x2(const SymMat2& cov) {
  const double a = cov.xx;
  const double b = cov.xy;
  const double c = cov.yy;
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return std::nullopt;

  const double det = diff_of_products(a, c, b, b);
  const double half_trace = 0.5 * (a + c);
  if (!(det > 0.0) || !(half_trace > 0.0)) return std::nullopt;

  const double radius = std::hypot(0.5 * (a - c), b);
  Eigen2 out;
  out.lambda1 = half_trace + radius;
  // The minor eigenvalue from det / lambda1 avoids the subtraction that
  // loses all digits for strongly anisotropic matrices.
  out.lambda2 = std::min(det / out.lambda1, out.lambda1);
  if (!(out.lambda2 > 0.0)) return std::nullopt;

  // Two candidate eigenvectors for lambda1; keep the better conditioned one.
  const Vec2 va{b, out.lambda1 - a};
  const Vec2 vb{out.lambda1 - c, b};
  const Vec2 v = norm(va) >= norm(vb) ? va : vb;
  const double n = norm(v);
  if (n > 0.0 && radius > 0.0) {
    out.e1 = canonical_sign(v * (1.0 / n));
  } else {
    out.e1 = {1.0, 0.0};
  }
  out.e2 = canonical_sign(Vec2{-out.e1.y, out.e1.x});
  return out;
}

SymMat2 reconstruct(const Eigen2& eig) {
  const Vec2 p = eig.e1;
  const Vec2 q = eig.e2;
  return {eig.lambda1 * p.x * p.x + eig.lambda2 * q.x * q.x,
          eig.lambda1 * p.x * p.y + eig.lambda2 * q.x * q.y,
          eig.lambda1 * p.y * p.y + eig.lambda2 * q.y * q.y};
}

SymMat2 inverse(const SymMat2& m) {
  const double det = diff_of_products(m.xx, m.yy, m.xy, m.xy);
  const double inv = 1.0 / det;
  return {m.yy * inv, -m.xy * inv, m.xx * inv};
}

}  // namespace gblend
