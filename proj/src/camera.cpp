#include "edgevo/camera.hpp"

namespace edgevo {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidInput("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InvalidInput("intrinsics: non-positive image size");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw InvalidInput("intrinsics: principal point outside image");
}

CameraIntrinsics CameraIntrinsics::scaled(int level) const {
  const double s = 1.0 / static_cast<double>(1 << level);
  CameraIntrinsics out = *this;
  out.fx = fx * s;
  out.fy = fy * s;
  out.cx = cx * s;
  out.cy = cy * s;
  out.width = (width + (1 << level) - 1) >> level;
  out.height = (height + (1 << level) - 1) >> level;
  return out;
}

Eigen::Matrix3d cayley_to_rotation(const CayleyRotation& rot) {
  const double c1 = rot.c1, c2 = rot.c2, c3 = rot.c3;
  const double K = 1.0 + c1 * c1 + c2 * c2 + c3 * c3;
  Eigen::Matrix3d R;
  R << 1 + c1 * c1 - c2 * c2 - c3 * c3, 2 * (c1 * c2 - c3), 2 * (c1 * c3 + c2),
      2 * (c1 * c2 + c3), 1 - c1 * c1 + c2 * c2 - c3 * c3, 2 * (c2 * c3 - c1),
      2 * (c1 * c3 - c2), 2 * (c2 * c3 + c1), 1 - c1 * c1 - c2 * c2 + c3 * c3;
  return R / K;
}

CayleyRotation cayley_from_rotation(const Eigen::Matrix3d& R) {
  // c = q_xyz / q_w for the quaternion (w, xyz) of R.
  const Eigen::Quaterniond q(R);
  if (std::abs(q.w()) < 1e-6)
    throw InvalidInput("cayley_from_rotation: rotation too close to 180 degrees");
  return {q.x() / q.w(), q.y() / q.w(), q.z() / q.w()};
}

std::array<Eigen::Matrix3d, 3> cayley_rotation_derivatives(const CayleyRotation& rot) {
  const double c1 = rot.c1, c2 = rot.c2, c3 = rot.c3;
  const double K = 1.0 + c1 * c1 + c2 * c2 + c3 * c3;
  const Eigen::Matrix3d R = cayley_to_rotation(rot);

  // R = N / K with N the numerator matrix; dR/dck = (dN/dck - 2 ck R) / K.
  Eigen::Matrix3d dN1, dN2, dN3;
  dN1 << 2 * c1, 2 * c2, 2 * c3,
         2 * c2, -2 * c1, -2,
         2 * c3, 2, -2 * c1;
  dN2 << -2 * c2, 2 * c1, 2,
         2 * c1, 2 * c2, 2 * c3,
         -2, 2 * c3, -2 * c2;
  dN3 << -2 * c3, -2, 2 * c1,
         2, -2 * c3, 2 * c2,
         2 * c1, 2 * c2, 2 * c3;

  return {(dN1 - 2 * c1 * R) / K, (dN2 - 2 * c2 * R) / K, (dN3 - 2 * c3 * R) / K};
}

Pixel project(const CameraIntrinsics& K, const Point3& p) {
  if (!(p.z() > 0.0)) throw InvalidInput("project: point behind camera");
  return {K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy};
}

Point3 backproject(const CameraIntrinsics& K, const Pixel& px, double z) {
  if (!(z > 0.0)) throw InvalidInput("backproject: invalid depth");
  return {(px.x() - K.cx) / K.fx * z, (px.y() - K.cy) / K.fy * z, z};
}

Point3 transform_to_frame(const Pose& pose, const Point3& s) {
  return cayley_to_rotation(pose.rot).transpose() * (s - pose.t);
}

Eigen::Vector2d warp_gradient(const Pose& pose, const CameraIntrinsics& K,
                              const Pixel& model_pixel,
                              const Eigen::Vector2d& model_gradient, double depth) {
  const Point3 s = backproject(K, model_pixel, depth);
  const Point3 s_h = backproject(K, model_pixel + model_gradient, depth);
  const Eigen::Matrix3d Rt = cayley_to_rotation(pose.rot).transpose();
  const Point3 p = Rt * (s - pose.t);
  const Point3 p_h = Rt * (s_h - pose.t);
  if (!(p.z() > 0.0) || !(p_h.z() > 0.0)) return model_gradient;
  const Eigen::Vector2d diff = project(K, p_h) - project(K, p);
  const double n = diff.norm();
  if (n < 1e-9) return model_gradient;
  return diff / n;
}

}  // namespace edgevo
