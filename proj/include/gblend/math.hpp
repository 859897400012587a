#pragma once

// Closed-form special functions and 2x2 linear algebra shared by every
// blending kernel. Everything here is a pure function.

#include <cmath>
#include <optional>

namespace gblend {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Symmetric 2x2 matrix; only the three unique entries are stored.
struct SymMat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  constexpr bool operator==(const SymMat2&) const = default;
};

/// Eigen-decomposition of a symmetric positive-definite 2x2 matrix.
/// lambda1 >= lambda2 > 0; e1, e2 are orthonormal.
struct Eigen2 {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};

  double sigma1() const { return std::sqrt(lambda1); }
  double sigma2() const { return std::sqrt(lambda2); }
};

/// Error function, Cody's rational Chebyshev approximations.
/// Absolute error below 1e-15 on the whole real line.
double erf(double x);

/// Complementary error function with full relative accuracy in the tail.
double erfc(double x);

/// Truncated moments of the unnormalized 1D Gaussian,
/// I^k_sigma(a, b) = \int_a^b x^k exp(-x^2 / (2 sigma^2)) dx for k = 0, 1, 2.
struct Moments1D {
  double i0 = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
};

/// Single moment I^k_sigma(a, b). Throws std::invalid_argument for k outside
/// {0,1,2}, sigma <= 0, a > b or non-finite input.
double gaussian_moment(int k, double sigma, double a, double b);

/// All three moments at once, unchecked. Requires sigma > 0 and a <= b.
Moments1D gaussian_moments(double sigma, double a, double b);

/// I^0 alone, unchecked. Requires sigma > 0 and a <= b.
double gaussian_mass(double sigma, double a, double b);

/// Analytic eigen-decomposition. Returns nullopt when the matrix is not
/// positive definite (or not finite); the caller is expected to cull.
/// Eigenvector signs are fixed so the largest-magnitude component is positive.
std::optional<Eigen2> eigen2x2(const SymMat2& cov);

/// lambda1 e1 e1^T + lambda2 e2 e2^T.
SymMat2 reconstruct(const Eigen2& eig);

/// Inverse of an SPD matrix (the "conic" used for point evaluation).
SymMat2 inverse(const SymMat2& m);

/// Quadratic form d^T m d.
constexpr double quad_form(const SymMat2& m, Vec2 d) {
  return m.xx * d.x * d.x + 2.0 * m.xy * d.x * d.y + m.yy * d.y * d.y;
}

}  // namespace gblend
