#include <doctest.h>

#include "helpers.hpp"

using namespace edgevo;

namespace {
const CameraIntrinsics kVga{500.0, 500.0, 320.0, 240.0, 640, 480};
}

TEST_CASE("cayley: zero parameters give the identity") {
  CHECK(cayley_to_rotation({0, 0, 0}).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST_CASE("cayley: (1,0,0) is a 90 degree rotation about x") {
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((cayley_to_rotation({1, 0, 0}) - expected).lpNorm<Eigen::Infinity>() < 1e-15);
}

TEST_CASE("cayley: random parameters give orthonormal matrices with det 1") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d R = cayley_to_rotation({d(rng), d(rng), d(rng)});
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(std::fabs(R.determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("cayley: round trip through the rotation matrix") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const CayleyRotation c{d(rng), d(rng), d(rng)};
    const CayleyRotation back = cayley_from_rotation(cayley_to_rotation(c));
    CHECK(std::fabs(back.c1 - c.c1) < 1e-12);
    CHECK(std::fabs(back.c2 - c.c2) < 1e-12);
    CHECK(std::fabs(back.c3 - c.c3) < 1e-12);
  }
}

TEST_CASE("cayley: analytic rotation derivatives match finite differences") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> d(-0.8, 0.8);
  const double h = 1e-7;
  for (int i = 0; i < 50; ++i) {
    const CayleyRotation c{d(rng), d(rng), d(rng)};
    const auto dR = cayley_rotation_derivatives(c);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d v = c.vec();
      v[k] += h;
      const Eigen::Matrix3d Rp = cayley_to_rotation(CayleyRotation::from_vec(v));
      v[k] -= 2 * h;
      const Eigen::Matrix3d Rm = cayley_to_rotation(CayleyRotation::from_vec(v));
      CHECK((dR[k] - (Rp - Rm) / (2 * h)).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }
}

TEST_CASE("project: on-axis and off-axis pinhole values") {
  CHECK(project(kVga, {0, 0, 218.75}).isApprox(Pixel(320, 240), 1e-12));
  CHECK(project(kVga, {43.75, 0, 218.75}).isApprox(Pixel(420, 240), 1e-12));
  CHECK_THROWS_AS(project(kVga, {0, 0, -1.0}), InvalidInput);
  CHECK_THROWS_AS(project(kVga, {0, 0, 0.0}), InvalidInput);
}

TEST_CASE("backproject: inverse pinhole and round trip") {
  CHECK(backproject(kVga, {320, 240}, 2.0).isApprox(Point3(0, 0, 2), 1e-12));
  CHECK(backproject(kVga, {420, 240}, 218.75).isApprox(Point3(43.75, 0, 218.75), 1e-12));
  CHECK_THROWS_AS(backproject(kVga, {1, 1}, 0.0), InvalidInput);
  CHECK_THROWS_AS(backproject(kVga, {1, 1}, -2.0), InvalidInput);

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> du(0.0, 639.0), dv(0.0, 479.0), dz(0.1, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const Pixel px(du(rng), dv(rng));
    const double z = dz(rng);
    const Point3 p = backproject(kVga, px, z);
    CHECK(p.z() == doctest::Approx(z).epsilon(1e-15));
    CHECK((project(kVga, p) - px).norm() < 1e-9);
  }
}

TEST_CASE("transform_to_frame: identity, translation, isometry") {
  const Point3 s(1.0, -0.5, 5.0);
  CHECK(transform_to_frame(Pose::identity(), s).isApprox(s, 1e-15));

  Pose shift;
  shift.t = {1, 0, 0};
  CHECK(transform_to_frame(shift, {1, 0, 5}).isApprox(Point3(0, 0, 5), 1e-14));

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Pose pose = test::random_pose(rng, 2.0, 0.8);
    const Point3 a(d(rng), d(rng), d(rng)), b(d(rng), d(rng), d(rng));
    const double before = (a - b).norm();
    const double after = (transform_to_frame(pose, a) - transform_to_frame(pose, b)).norm();
    CHECK(std::fabs(before - after) < 1e-12);
    // Composing with the inverse pose returns the input point.
    const Point3 back = pose.camera_to_reference().apply(transform_to_frame(pose, a));
    CHECK((back - a).norm() < 1e-10);
  }
}

TEST_CASE("pose: composition matches transform composition") {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const Pose a = test::random_pose(rng, 1.0, 0.5);
    const Pose b = test::random_pose(rng, 1.0, 0.5);
    const RigidTransform direct = a.camera_to_reference().compose(b.camera_to_reference());
    const RigidTransform composed = a.compose(b).camera_to_reference();
    CHECK((direct.R - composed.R).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((direct.t - composed.t).lpNorm<Eigen::Infinity>() < 1e-12);
  }
}

TEST_CASE("warp_gradient: identity pose keeps the gradient") {
  const Eigen::Vector2d g = Eigen::Vector2d(0.6, 0.8);
  const Eigen::Vector2d w = warp_gradient(Pose::identity(), kVga, {100, 120}, g, 2.5);
  CHECK((w - g).norm() < 1e-12);
}

TEST_CASE("warp_gradient: in-plane camera roll rotates the gradient oppositely") {
  // 90 degrees about the optical axis: image content rotates by -90 degrees.
  Pose roll;
  roll.rot = {0, 0, 1};
  const Eigen::Vector2d g(1.0, 0.0);
  const Eigen::Vector2d w = warp_gradient(roll, kVga, {320, 240}, g, 3.0);
  const Eigen::Vector2d expected(0.0, -1.0);
  CHECK((w - expected).norm() < 1e-9);
}

TEST_CASE("warp_gradient: in-plane translation of a fronto-parallel point is neutral") {
  Pose slide;
  slide.t = {0.4, -0.2, 0.0};
  const Eigen::Vector2d g = Eigen::Vector2d(1.0, 2.0).normalized();
  const Eigen::Vector2d w = warp_gradient(slide, kVga, {200, 300}, g, 4.0);
  CHECK((w - g).norm() < 1e-6);
}

TEST_CASE("intrinsics: validation and pyramid scaling") {
  CHECK_THROWS_AS((CameraIntrinsics{-1, 500, 320, 240, 640, 480}).validate(), InvalidInput);
  CHECK_THROWS_AS((CameraIntrinsics{500, 500, 700, 240, 640, 480}).validate(), InvalidInput);

  const CameraIntrinsics K1 = kVga.scaled(1);
  const Point3 p(0.3, -0.2, 2.0);
  CHECK((project(K1, p) - project(kVga, p) / 2.0).norm() < 1e-12);
  const CameraIntrinsics K2 = kVga.scaled(2);
  CHECK((project(K2, p) - project(kVga, p) / 4.0).norm() < 1e-12);
  CHECK(K2.width == 160);
  CHECK(K2.height == 120);
}
