#pragma once

#include <array>

#include <Eigen/Dense>

#include "edgevo/core.hpp"

namespace edgevo {

struct CameraIntrinsics {
  double fx = 0, fy = 0;  // focal lengths [px]
  double cx = 0, cy = 0;  // principal point [px]
  int width = 0, height = 0;

  void validate() const;

  /// Intrinsics of pyramid level l (image and focal lengths divided by 2^l),
  /// so that projecting at level l equals the level-0 projection / 2^l.
  CameraIntrinsics scaled(int level) const;
};

/// Rational 3-parameter rotation, c = tan(angle/2) * axis. Covers every
/// rotation except 180 degrees about any axis; used for local increments only.
struct CayleyRotation {
  double c1 = 0, c2 = 0, c3 = 0;

  Eigen::Vector3d vec() const { return {c1, c2, c3}; }
  static CayleyRotation from_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

Eigen::Matrix3d cayley_to_rotation(const CayleyRotation& rot);

/// Inverse of cayley_to_rotation. Throws InvalidInput within ~1e-6 of a
/// 180-degree rotation, where the parameterization blows up.
CayleyRotation cayley_from_rotation(const Eigen::Matrix3d& R);

/// Derivatives dR/dc_k, k = 0..2, evaluated at rot.
std::array<Eigen::Matrix3d, 3> cayley_rotation_derivatives(const CayleyRotation& rot);

/// Rigid transform X_out = R * X_in + t. Used for absolute (world) poses,
/// which are composed as matrices after each solve.
struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return R * p + t; }

  RigidTransform compose(const RigidTransform& rhs) const {
    return {R * rhs.R, R * rhs.t + t};
  }
  RigidTransform inverse() const { return {R.transpose(), -(R.transpose() * t)}; }
};

/// Camera pose relative to a reference frame: the 6-vector
/// [tx, ty, tz, c1, c2, c3] optimized by the solver. t is the camera position
/// expressed in reference coordinates, rot the orientation increment with
/// respect to the reference orientation.
struct Pose {
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  CayleyRotation rot;

  static Pose identity() { return {}; }

  Eigen::Matrix<double, 6, 1> params() const {
    Eigen::Matrix<double, 6, 1> p;
    p << t.x(), t.y(), t.z(), rot.c1, rot.c2, rot.c3;
    return p;
  }
  static Pose from_params(const Eigen::Matrix<double, 6, 1>& p) {
    return {{p[0], p[1], p[2]}, {p[3], p[4], p[5]}};
  }

  /// Transform mapping current-camera coordinates into reference coordinates.
  RigidTransform camera_to_reference() const {
    return {cayley_to_rotation(rot), t};
  }
  static Pose from_transform(const RigidTransform& cam_to_ref) {
    return {cam_to_ref.t, cayley_from_rotation(cam_to_ref.R)};
  }

  Pose compose(const Pose& rhs) const {
    return from_transform(camera_to_reference().compose(rhs.camera_to_reference()));
  }
  Pose inverse() const { return from_transform(camera_to_reference().inverse()); }
};

/// Pinhole projection; requires p.z > 0. The result is sub-pixel and may lie
/// outside the image bounds.
Pixel project(const CameraIntrinsics& K, const Point3& p);

/// Inverse projection at depth z (the camera-frame z coordinate of the result).
Point3 backproject(const CameraIntrinsics& K, const Pixel& px, double z);

/// Maps a reference-frame point into the camera frame of `pose`:
/// R(c)^T * (s - t).
Point3 transform_to_frame(const Pose& pose, const Point3& s);

/// Warps a unit image-gradient direction attached to a reference edge pixel
/// into the current view: a hallucinated point one pixel along the gradient
/// at the same depth is transformed and reprojected alongside the original,
/// and the image-plane difference renormalized. Falls back to the input
/// direction when the pair degenerates.
Eigen::Vector2d warp_gradient(const Pose& pose, const CameraIntrinsics& K,
                              const Pixel& model_pixel,
                              const Eigen::Vector2d& model_gradient, double depth);

}  // namespace edgevo
