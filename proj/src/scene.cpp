#include "gblend/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gblend {

void Camera::validate() const {
  const Eigen::Matrix3d r = world_to_cam.leftCols<3>();
  const double ortho_err = (r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err <= 1e-6)) throw std::invalid_argument("camera: rotation block is not orthonormal");
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("camera: focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy))
    throw std::invalid_argument("camera: principal point must be finite");
  if (width <= 0 || height <= 0) throw std::invalid_argument("camera: image size must be positive");
  if (!(near > 0.0)) throw std::invalid_argument("camera: near plane must be positive");
  if (!world_to_cam.allFinite()) throw std::invalid_argument("camera: pose must be finite");
}

Camera Camera::scaled(double k) const {
  if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("camera: scale must be positive");
  Camera out = *this;
  out.fx *= k;
  out.fy *= k;
  out.cx *= k;
  out.cy *= k;
  out.width = std::max(1, static_cast<int>(std::lround(width * k)));
  out.height = std::max(1, static_cast<int>(std::lround(height * k)));
  return out;
}

Eigen::Vector3d Camera::position() const {
  const Eigen::Matrix3d r = world_to_cam.leftCols<3>();
  return -r.transpose() * world_to_cam.col(3);
}

Eigen::Matrix3d build_covariance(const Eigen::Vector3d& scale, const Eigen::Quaterniond& rot) {
  const Eigen::Matrix3d m = rot.toRotationMatrix() * scale.asDiagonal();
  Eigen::Matrix3d cov = m * m.transpose();
  // Exact symmetry.
  cov(1, 0) = cov(0, 1);
  cov(2, 0) = cov(0, 2);
  cov(2, 1) = cov(1, 2);
  return cov;
}

std::optional<ProjectedSplat> project_splat(const Splat3D& splat, const Camera& cam,
                                            const ProjectionOptions& opts, ProjectionStats* stats) {
  const Eigen::Matrix3d rot = cam.world_to_cam.leftCols<3>();
  const Eigen::Vector3d t = rot * splat.mu + cam.world_to_cam.col(3);
  const double z = t.z();
  if (!std::isfinite(z)) {
    if (stats) ++stats->non_finite;
    return std::nullopt;
  }
  if (z <= cam.near) {
    if (stats) ++stats->behind_near;
    return std::nullopt;
  }

  const double inv_z = 1.0 / z;
  Eigen::Matrix<double, 2, 3> jac;
  jac << cam.fx * inv_z, 0.0, -cam.fx * t.x() * inv_z * inv_z,  //
      0.0, cam.fy * inv_z, -cam.fy * t.y() * inv_z * inv_z;

  const Eigen::Matrix<double, 2, 3> jw = jac * rot;
  const Eigen::Matrix2d cov = jw * build_covariance(splat.scale, splat.rot) * jw.transpose();

  ProjectedSplat out;
  out.mu2d = {cam.fx * t.x() * inv_z + cam.cx, cam.fy * t.y() * inv_z + cam.cy};
  out.cov2d = {cov(0, 0) + opts.lowpass, 0.5 * (cov(0, 1) + cov(1, 0)), cov(1, 1) + opts.lowpass};
  out.depth = z;
  out.opacity = splat.opacity;
  out.source = 0;

  if (!std::isfinite(out.mu2d.x) || !std::isfinite(out.mu2d.y) || !std::isfinite(out.cov2d.xx) ||
      !std::isfinite(out.cov2d.xy) || !std::isfinite(out.cov2d.yy)) {
    if (stats) ++stats->non_finite;
    return std::nullopt;
  }
  const auto eig = eigen2x2(out.cov2d);
  if (!eig) {
    if (stats) ++stats->degenerate;
    return std::nullopt;
  }
  out.eig = *eig;
  out.conic = inverse(out.cov2d);

  Eigen::Vector3d dir = splat.mu - cam.position();
  const double len = dir.norm();
  dir = len > 0.0 ? Eigen::Vector3d(dir / len) : Eigen::Vector3d(0.0, 0.0, 1.0);
  out.color = eval_sh(splat.sh, dir);
  return out;
}

std::optional<ProjectedSplat> make_splat_2d(Vec2 mu, const SymMat2& cov, double opacity, Rgb color,
                                            double depth) {
  if (!std::isfinite(mu.x) || !std::isfinite(mu.y)) return std::nullopt;
  const auto eig = eigen2x2(cov);
  if (!eig) return std::nullopt;
  ProjectedSplat s;
  s.mu2d = mu;
  s.cov2d = cov;
  s.depth = depth;
  s.opacity = opacity;
  s.color = color;
  s.eig = *eig;
  s.conic = inverse(cov);
  return s;
}

std::vector<ProjectedSplat> project_all(std::span<const Splat3D> splats, const Camera& cam,
                                        const ProjectionOptions& opts, ProjectionStats* stats) {
  std::vector<ProjectedSplat> out;
  out.reserve(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i) {
    if (auto p = project_splat(splats[i], cam, opts, stats)) {
      p->source = i;
      out.push_back(*p);
    }
  }
  return out;
}

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr std::array<double, 5> kC2 = {1.0925484305920792, -1.0925484305920792,
                                       0.31539156525252005, -1.0925484305920792,
                                       0.5462742152960396};
constexpr std::array<double, 7> kC3 = {-0.5900435899266435, 2.890611442640554,
                                       -0.4570457994644658, 0.3731763325901154,
                                       -0.4570457994644658, 1.445305721320277,
                                       -0.5900435899266435};

}  // namespace

bool is_valid_sh_count(std::size_t n) { return n == 1 || n == 4 || n == 9 || n == 16; }

Rgb eval_sh(std::span<const Eigen::Vector3d> sh, const Eigen::Vector3d& dir) {
  if (!is_valid_sh_count(sh.size()))
    throw std::invalid_argument("eval_sh: unsupported coefficient count " + std::to_string(sh.size()));
  Eigen::Vector3d c = kC0 * sh[0];
  if (sh.size() > 1) {
    const double x = dir.x();
    const double y = dir.y();
    const double z = dir.z();
    c += -kC1 * y * sh[1] + kC1 * z * sh[2] - kC1 * x * sh[3];
    if (sh.size() > 4) {
      const double xx = x * x, yy = y * y, zz = z * z;
      const double xy = x * y, yz = y * z, xz = x * z;
      c += kC2[0] * xy * sh[4] + kC2[1] * yz * sh[5] + kC2[2] * (2.0 * zz - xx - yy) * sh[6] +
           kC2[3] * xz * sh[7] + kC2[4] * (xx - yy) * sh[8];
      if (sh.size() > 9) {
        c += kC3[0] * y * (3.0 * xx - yy) * sh[9] + kC3[1] * xy * z * sh[10] +
             kC3[2] * y * (4.0 * zz - xx - yy) * sh[11] +
             kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy) * sh[12] +
             kC3[4] * x * (4.0 * zz - xx - yy) * sh[13] + kC3[5] * z * (xx - yy) * sh[14] +
             kC3[6] * x * (xx - 3.0 * yy) * sh[15];
      }
    }
  }
  c.array() += 0.5;
  return {std::max(c.x(), 0.0), std::max(c.y(), 0.0), std::max(c.z(), 0.0)};
}

Eigen::Vector3d sh_dc_for_color(const Rgb& color) {
  return Eigen::Vector3d(color.r - 0.5, color.g - 0.5, color.b - 0.5) / kC0;
}

}  // namespace gblend
