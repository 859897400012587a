#pragma once

// Scene representation: 3D splats, the pinhole camera, screen-space
// projection and view-dependent color.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gblend/math.hpp"

namespace gblend {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  constexpr Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
  constexpr Rgb operator-(const Rgb& o) const { return {r - o.r, g - o.g, b - o.b}; }
  constexpr Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
  constexpr Rgb& operator+=(const Rgb& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
  constexpr bool operator==(const Rgb&) const = default;
};

/// One 3D Gaussian primitive, always stored post-activation.
struct Splat3D {
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();
  Eigen::Quaterniond rot = Eigen::Quaterniond::Identity();
  double opacity = 1.0;
  /// Band-major SH coefficients, one rgb triple per basis function.
  /// Size is 1, 4, 9 or 16.
  std::vector<Eigen::Vector3d> sh{Eigen::Vector3d::Zero()};
};

/// Pinhole camera. Pixel (i, j) covers [i, i+1] x [j, j+1].
struct Camera {
  Eigen::Matrix<double, 3, 4> world_to_cam = Eigen::Matrix<double, 3, 4>::Identity();
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  double near = 0.01;

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  /// Joint scaling of intrinsics and resolution (zoom-in for k > 1,
  /// zoom-out for k < 1). Resolution is rounded to the nearest integer.
  Camera scaled(double k) const;

  Eigen::Vector3d position() const;
};

/// Screen-space Gaussian ready for blending.
struct ProjectedSplat {
  Vec2 mu2d;
  SymMat2 cov2d;
  double depth = 0.0;
  double opacity = 0.0;
  Rgb color;
  Eigen2 eig;     // of cov2d
  SymMat2 conic;  // inverse of cov2d
  std::size_t source = 0;
};

struct ProjectionOptions {
  /// Added to both diagonal entries of cov2d, in pixels^2.
  double lowpass = 0.0;
};

struct ProjectionStats {
  std::size_t behind_near = 0;
  std::size_t non_finite = 0;
  std::size_t degenerate = 0;

  std::size_t numerical_culls() const { return non_finite + degenerate; }
};

/// Screen-space splat from its 2D parameters; nullopt unless cov2d is
/// positive definite and finite.
std::optional<ProjectedSplat> make_splat_2d(Vec2 mu, const SymMat2& cov, double opacity,
                                            Rgb color = {1.0, 1.0, 1.0}, double depth = 1.0);

/// R S S^T R^T.
Eigen::Matrix3d build_covariance(const Eigen::Vector3d& scale, const Eigen::Quaterniond& rot);

/// Perspective projection with the local affine (EWA) Jacobian.
/// Returns nullopt if the splat is culled; stats (if given) records why.
std::optional<ProjectedSplat> project_splat(const Splat3D& splat, const Camera& cam,
                                            const ProjectionOptions& opts = {},
                                            ProjectionStats* stats = nullptr);

/// Projects every splat, dropping culled ones; source holds the input index.
std::vector<ProjectedSplat> project_all(std::span<const Splat3D> splats, const Camera& cam,
                                        const ProjectionOptions& opts,
                                        ProjectionStats* stats = nullptr);

/// Real spherical harmonics up to degree 3 with the +0.5 DC offset used by
/// trained splat files; clamped to >= 0. Throws std::invalid_argument for an
/// incomplete band count.
Rgb eval_sh(std::span<const Eigen::Vector3d> sh, const Eigen::Vector3d& dir);

/// SH DC coefficient that makes eval_sh return `color` for any direction.
Eigen::Vector3d sh_dc_for_color(const Rgb& color);

bool is_valid_sh_count(std::size_t n);

}  // namespace gblend
