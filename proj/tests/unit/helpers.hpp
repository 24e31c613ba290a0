#pragma once

#include <random>

#include "edgevo/camera.hpp"
#include "edgevo/nn_fields.hpp"

namespace edgevo::test {

/// Brute-force nearest-seed oracle with the production tie rule
/// (lexicographically smallest (row, col) among equidistant seeds).
struct BruteNN {
  int64_t dist2 = std::numeric_limits<int64_t>::max();
  int32_t row = -1, col = -1;
};

inline BruteNN brute_force_nn(const std::vector<Eigen::Vector2i>& seeds, int r, int c) {
  BruteNN best;
  for (const auto& s : seeds) {
    const int64_t dr = r - s.y(), dc = c - s.x();
    const int64_t d2 = dr * dr + dc * dc;
    if (d2 < best.dist2 ||
        (d2 == best.dist2 &&
         (s.y() < best.row || (s.y() == best.row && s.x() < best.col)))) {
      best = {d2, s.y(), s.x()};
    }
  }
  return best;
}

/// Random edge map: `count` unique seeds with random unit gradients.
inline EdgeMap2D random_edge_map(std::mt19937_64& rng, int width, int height, int count) {
  std::uniform_int_distribution<int> du(0, width - 1), dv(0, height - 1);
  std::uniform_real_distribution<double> da(0.0, 2.0 * M_PI);
  Image<uint8_t> used(width, height, 0);
  EdgeMap2D edges;
  edges.width = width;
  edges.height = height;
  while (static_cast<int>(edges.size()) < count) {
    const int u = du(rng), v = dv(rng);
    if (used.at(v, u)) continue;
    used.at(v, u) = 1;
    const double a = da(rng);
    const Eigen::Vector2d g(std::cos(a), std::sin(a));
    edges.pixels.push_back({u, v});
    edges.grad_dir.push_back(g);
    edges.bin.push_back(static_cast<uint8_t>(orientation_bin(g)));
  }
  return edges;
}

/// The frozen-neighbour residual of Eq.-10 form: direction and neighbour held
/// fixed while the pose varies. Reference implementation for finite
/// differences.
inline double frozen_residual(const Eigen::Matrix<double, 6, 1>& params, const Point3& s,
                              const Eigen::Vector2d& dir, const Eigen::Vector2d& nn,
                              const CameraIntrinsics& K) {
  const Pose pose = Pose::from_params(params);
  const Point3 p = transform_to_frame(pose, s);
  return dir.dot(project(K, p) - nn);
}

inline Pose random_pose(std::mt19937_64& rng, double t_range, double c_range) {
  std::uniform_real_distribution<double> dt(-t_range, t_range), dc(-c_range, c_range);
  Pose pose;
  pose.t = {dt(rng), dt(rng), dt(rng)};
  pose.rot = {dc(rng), dc(rng), dc(rng)};
  return pose;
}

}  // namespace edgevo::test
