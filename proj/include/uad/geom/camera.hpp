#ifndef UAD_GEOM_CAMERA_HPP
#define UAD_GEOM_CAMERA_HPP

#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "uad/core/error.hpp"
#include "uad/core/grid.hpp"

namespace uad::geom {

/// One rendered RGB-D view of an object.
///
/// Pixel centers sit at integer coordinates: pixel (row r, col c) is the image
/// point u = c, v = r. Depth is camera-frame z in meters; 0 marks an invalid
/// reading. `extrinsics` maps camera coordinates to world coordinates.
struct CameraView {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();
  Rgb rgb;
  Map depth;
  Mask fg_mask;
  LabelMap link_ids;  // optional per-pixel link labels; empty when absent

  [[nodiscard]] int height() const { return depth.height; }
  [[nodiscard]] int width() const { return depth.width; }
  [[nodiscard]] Eigen::Matrix3d rotation() const { return extrinsics.topLeftCorner<3, 3>(); }
  [[nodiscard]] Eigen::Vector3d translation() const { return extrinsics.topRightCorner<3, 1>(); }
};

/// Checks the structural invariants of a view. Throws uad::Error on violation.
inline void validate(const CameraView& v, bool allow_skew = false) {
  const auto& k = v.intrinsics;
  if (!(k(0, 0) > 0.0) || !(k(1, 1) > 0.0))
    throw Error("camera", "intrinsics must have positive focal lengths");
  if (!allow_skew && k(0, 1) != 0.0) throw Error("camera", "intrinsics skew must be zero");
  if (std::abs(k.determinant()) < 1e-12) throw Error("camera", "intrinsics not invertible");
  const Eigen::Matrix3d r = v.rotation();
  if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw Error("camera", "extrinsics rotation is not orthonormal");
  if (v.depth.empty()) throw Error("camera", "view has no depth map");
  if (!v.fg_mask.same_shape(v.depth)) throw Error("camera", "mask/depth size mismatch");
  if (!v.rgb.empty() && !v.rgb.same_shape(v.depth)) throw Error("camera", "rgb/depth size mismatch");
  if (!v.link_ids.empty() && !v.link_ids.same_shape(v.depth))
    throw Error("camera", "link map/depth size mismatch");
  for (std::size_t i = 0; i < v.depth.pixels(); ++i) {
    if (!(v.depth[i] >= 0.0)) throw Error("camera", "negative or NaN depth");
    if (v.fg_mask[i] && v.depth[i] <= 0.0) throw Error("camera", "foreground pixel without depth");
  }
}

/// Camera-frame point for image coordinates (u, v) at depth z.
inline Eigen::Vector3d unproject_camera(const Eigen::Matrix3d& k, double u, double v, double z) {
  const double fx = k(0, 0), fy = k(1, 1), cx = k(0, 2), cy = k(1, 2), s = k(0, 1);
  const double y = (v - cy) / fy;
  const double x = (u - cx - s * y) / fx;
  return {x * z, y * z, z};
}

/// World point seen at pixel (row, col) with the given depth.
inline Eigen::Vector3d unproject_pixel(const CameraView& view, int row, int col, double z) {
  const Eigen::Vector3d pc = unproject_camera(view.intrinsics, col, row, z);
  return view.rotation() * pc + view.translation();
}

struct Projection {
  double u = 0.0;  // column coordinate
  double v = 0.0;  // row coordinate
  double z = 0.0;  // camera-frame depth
  [[nodiscard]] int col() const { return static_cast<int>(std::lround(u)); }
  [[nodiscard]] int row() const { return static_cast<int>(std::lround(v)); }
};

/// Projects a world point. Empty for points on or behind the image plane.
inline std::optional<Projection> project(const CameraView& view, const Eigen::Vector3d& p) {
  const Eigen::Vector3d pc = view.rotation().transpose() * (p - view.translation());
  if (!(pc.z() > 0.0)) return std::nullopt;
  const auto& k = view.intrinsics;
  const double x = pc.x() / pc.z(), y = pc.y() / pc.z();
  return Projection{k(0, 0) * x + k(0, 1) * y + k(0, 2), k(1, 1) * y + k(1, 2), pc.z()};
}

/// Rigid camera-to-world transform looking from `eye` at `target`.
/// Camera axes follow the usual vision convention: +z forward, +y down.
inline Eigen::Matrix4d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                               const Eigen::Vector3d& up_hint = Eigen::Vector3d::UnitZ()) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d up = up_hint;
  if (std::abs(forward.dot(up)) > 0.999) up = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.block<3, 1>(0, 0) = right;
  t.block<3, 1>(0, 1) = down;
  t.block<3, 1>(0, 2) = forward;
  t.block<3, 1>(0, 3) = eye;
  return t;
}

inline Eigen::Matrix3d pinhole(double fx, double fy, double cx, double cy) {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

}  // namespace uad::geom

#endif  // UAD_GEOM_CAMERA_HPP
