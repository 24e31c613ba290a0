#include <doctest.h>

#include "edgevo/evaluation.hpp"
#include "helpers.hpp"

using namespace edgevo;

namespace {

Trajectory line_trajectory(int n, double dt, const Eigen::Vector3d& velocity) {
  Trajectory t;
  for (int i = 0; i < n; ++i) {
    RigidTransform p;
    p.t = velocity * (dt * i);
    t.push_back({dt * i, p});
  }
  return t;
}

Trajectory wiggle_trajectory(int n) {
  Trajectory t;
  for (int i = 0; i < n; ++i) {
    RigidTransform p;
    p.t = {std::cos(0.4 * i), std::sin(0.4 * i), 0.1 * i};
    p.R = Eigen::AngleAxisd(0.1 * i, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    t.push_back({1.0 * i, p});
  }
  return t;
}

Trajectory transformed(const Trajectory& in, const RigidTransform& T) {
  Trajectory out;
  for (const auto& e : in) out.push_back({e.timestamp, T.compose(e.pose)});
  return out;
}

// Direct numerical minimization of the alignment objective, independent of
// the SVD route used by compute_ate.
double ate_by_search(const std::vector<Point3>& est, const std::vector<Point3>& gt) {
  auto cost = [&](const Eigen::Matrix<double, 6, 1>& p) {
    const Eigen::Vector3d axis(p[0], p[1], p[2]);
    const double angle = axis.norm();
    const Eigen::Matrix3d R =
        angle < 1e-12 ? Eigen::Matrix3d::Identity()
                      : Eigen::AngleAxisd(angle, axis / angle).toRotationMatrix();
    const Eigen::Vector3d t(p[3], p[4], p[5]);
    double acc = 0.0;
    for (size_t i = 0; i < est.size(); ++i) acc += (gt[i] - (R * est[i] + t)).squaredNorm();
    return acc;
  };
  // Coordinate descent with shrinking steps.
  Eigen::Matrix<double, 6, 1> p = Eigen::Matrix<double, 6, 1>::Zero();
  double best = cost(p);
  double step = 0.5;
  while (step > 1e-9) {
    bool improved = false;
    for (int k = 0; k < 6; ++k)
      for (double sgn : {1.0, -1.0}) {
        Eigen::Matrix<double, 6, 1> q = p;
        q[k] += sgn * step;
        const double c = cost(q);
        if (c < best) {
          best = c;
          p = q;
          improved = true;
        }
      }
    if (!improved) step *= 0.5;
  }
  return std::sqrt(best / static_cast<double>(est.size()));
}

}  // namespace

TEST_CASE("compute_rpe: identical trajectories give zero") {
  const Trajectory t = wiggle_trajectory(20);
  const RpeResult r = compute_rpe(t, t, 1.0);
  CHECK(r.rmse_rotation_deg_per_s == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.rmse_translation_m_per_s == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.intervals > 0);
}

TEST_CASE("compute_rpe: constant-velocity translation against a static truth") {
  const Trajectory gt = line_trajectory(11, 1.0, {0, 0, 0});
  const Trajectory est = line_trajectory(11, 1.0, {0.1, 0, 0});
  const RpeResult r = compute_rpe(est, gt, 1.0);
  CHECK(std::fabs(r.rmse_translation_m_per_s - 0.1) < 1e-9);
  CHECK(std::fabs(r.rmse_rotation_deg_per_s) < 1e-9);
}

TEST_CASE("compute_rpe: constant-rate rotation against a static truth") {
  Trajectory gt, est;
  for (int i = 0; i < 11; ++i) {
    gt.push_back({1.0 * i, RigidTransform::identity()});
    RigidTransform p;
    p.R = Eigen::AngleAxisd(2.0 * M_PI / 180.0 * i, Eigen::Vector3d::UnitY()).toRotationMatrix();
    est.push_back({1.0 * i, p});
  }
  const RpeResult r = compute_rpe(est, gt, 1.0);
  CHECK(std::fabs(r.rmse_rotation_deg_per_s - 2.0) < 1e-9);
  CHECK(std::fabs(r.rmse_translation_m_per_s) < 1e-9);
}

TEST_CASE("compute_rpe: errors without overlap or enough poses") {
  const Trajectory a = line_trajectory(5, 1.0, {0, 0, 0});
  Trajectory late = a;
  for (auto& e : late) e.timestamp += 100.0;
  CHECK_THROWS_AS(compute_rpe(a, late, 1.0), EvaluationError);
  CHECK_THROWS_AS(compute_rpe(a, a, -1.0), InvalidInput);
}

TEST_CASE("compute_ate: zero on self, zero after constant offset") {
  const Trajectory t = wiggle_trajectory(15);
  CHECK(compute_ate(t, t) == doctest::Approx(0.0).epsilon(1e-12));

  RigidTransform offset = RigidTransform::identity();
  offset.t = {3.0, -2.0, 0.5};
  CHECK(compute_ate(transformed(t, offset), t) < 1e-9);
}

TEST_CASE("compute_ate: single displaced pose matches an independent minimizer") {
  Trajectory gt;
  const std::vector<Point3> base = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0.5, 0.5, 1.0}};
  for (size_t i = 0; i < base.size(); ++i) {
    RigidTransform p;
    p.t = base[i];
    gt.push_back({1.0 * i, p});
  }
  Trajectory est = gt;
  est[3].pose.t += Point3(0.0, 0.0, 0.4);

  std::vector<Point3> est_pts, gt_pts;
  for (size_t i = 0; i < gt.size(); ++i) {
    est_pts.push_back(est[i].pose.t);
    gt_pts.push_back(gt[i].pose.t);
  }
  const double expected = ate_by_search(est_pts, gt_pts);
  CHECK(compute_ate(est, gt) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("compute_ate: invariance to a common rigid transform") {
  const Trajectory est = wiggle_trajectory(12);
  Trajectory gt = wiggle_trajectory(12);
  for (auto& e : gt) e.pose.t += Point3(0.01, -0.02, 0.005);

  const double base = compute_ate(est, gt);
  RigidTransform T;
  T.R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  T.t = {5, -1, 2};
  CHECK(compute_ate(transformed(est, T), transformed(gt, T)) ==
        doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("compute_ate: degenerate cases raise") {
  const Trajectory two = line_trajectory(2, 1.0, {1, 0, 0});
  CHECK_THROWS_AS(compute_ate(two, two), EvaluationError);
  const Trajectory collinear = line_trajectory(10, 1.0, {1, 0, 0});
  CHECK_THROWS_AS(compute_ate(collinear, collinear), EvaluationError);
}

TEST_CASE("bias experiment: full-observation control converges for every method") {
  BiasExperimentConfig cfg;
  cfg.trials = 3;
  cfg.arc = 2.0 * M_PI;
  cfg.seed = 123;
  const BiasExperimentResult full = run_bias_experiment(cfg);
  for (const auto& m : full.methods)
    for (double e : m.errors) CHECK(e < 0.3);

  // With zero perturbation the full-circle solve must not move at all.
  cfg.perturb_translation = 0.0;
  const BiasExperimentResult zero = run_bias_experiment(cfg);
  for (const auto& m : zero.methods)
    for (double e : m.errors) CHECK(e < 1e-9);
}

TEST_CASE("bias experiment: partial observation biases every method except ONNF barely") {
  // Starting exactly at the ground truth, the partially observed data pulls
  // the estimate away; the oriented field suffers least.
  BiasExperimentConfig cfg;
  cfg.trials = 8;
  cfg.seed = 5;
  cfg.perturb_translation = 0.0;
  const BiasExperimentResult r = run_bias_experiment(cfg);
  REQUIRE(r.methods.size() == 3);
  const double edf = r.methods[0].median;
  const double annf = r.methods[1].median;
  const double onnf = r.methods[2].median;
  CHECK(onnf < annf);
  CHECK(onnf < edf);
  CHECK(onnf < 1.0);
}

TEST_CASE("bias experiment: bit-exact reproducibility under a fixed seed") {
  BiasExperimentConfig cfg;
  cfg.trials = 4;
  cfg.seed = 99;
  const BiasExperimentResult a = run_bias_experiment(cfg);
  const BiasExperimentResult b = run_bias_experiment(cfg);
  REQUIRE(a.methods.size() == b.methods.size());
  for (size_t m = 0; m < a.methods.size(); ++m)
    for (int i = 0; i < cfg.trials; ++i)
      CHECK(a.methods[m].errors[i] == b.methods[m].errors[i]);
}
