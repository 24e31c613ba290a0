#include "edgevo/evaluation.hpp"

#include <random>

#include <Eigen/Geometry>

namespace edgevo {

namespace {

struct AssociatedPoses {
  std::vector<double> t;  // est timestamps
  std::vector<RigidTransform> est, gt;
};

AssociatedPoses associate_trajectories(const Trajectory& est, const Trajectory& gt,
                                       double max_dt) {
  std::vector<double> ta, tb;
  for (const auto& e : est) ta.push_back(e.timestamp);
  for (const auto& e : gt) tb.push_back(e.timestamp);
  AssociatedPoses out;
  for (const auto& [i, j] : associate_timestamps(ta, tb, max_dt)) {
    out.t.push_back(est[i].timestamp);
    out.est.push_back(est[i].pose);
    out.gt.push_back(gt[j].pose);
  }
  return out;
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const size_t k = static_cast<size_t>(q * (v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

}  // namespace

double rotation_angle_deg(const Eigen::Matrix3d& R) {
  // atan2 of the skew norm against the trace: well conditioned at both ends,
  // and exactly zero for symmetric products like R^T R.
  const Eigen::Vector3d skew(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  const double s = 0.5 * skew.norm();
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c) * 180.0 / M_PI;
}

const char* field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::EDF:
      return "edf";
    case FieldKind::ANNF:
      return "annf";
    case FieldKind::ONNF:
      return "onnf";
  }
  return "?";
}

RpeResult compute_rpe(const Trajectory& est, const Trajectory& gt, double delta, double max_dt) {
  if (!(delta > 0.0)) throw InvalidInput("compute_rpe: delta must be positive");
  const AssociatedPoses assoc = associate_trajectories(est, gt, max_dt);
  if (assoc.t.size() < 2) throw EvaluationError("compute_rpe: not enough overlapping poses");

  double sum_r2 = 0.0, sum_t2 = 0.0;
  int n = 0;
  for (size_t a = 0; a < assoc.t.size(); ++a) {
    const double target = assoc.t[a] + delta;
    const auto it = std::lower_bound(assoc.t.begin(), assoc.t.end(), target);
    size_t b = static_cast<size_t>(it - assoc.t.begin());
    if (b == assoc.t.size() ||
        (b > 0 && target - assoc.t[b - 1] < assoc.t[b] - target))
      --b;
    if (b <= a) continue;
    const double dt = assoc.t[b] - assoc.t[a];
    if (std::fabs(dt - delta) > 0.5 * delta) continue;
    const RigidTransform rel_gt = assoc.gt[a].inverse().compose(assoc.gt[b]);
    const RigidTransform rel_est = assoc.est[a].inverse().compose(assoc.est[b]);
    const RigidTransform err = rel_gt.inverse().compose(rel_est);
    const double r = rotation_angle_deg(err.R) / dt;
    const double t = err.t.norm() / dt;
    sum_r2 += r * r;
    sum_t2 += t * t;
    ++n;
  }
  if (n == 0) throw EvaluationError("compute_rpe: no interval pairs at the requested delta");
  return {std::sqrt(sum_r2 / n), std::sqrt(sum_t2 / n), n};
}

double compute_ate(const Trajectory& est, const Trajectory& gt, double max_dt) {
  const AssociatedPoses assoc = associate_trajectories(est, gt, max_dt);
  const size_t n = assoc.t.size();
  if (n < 3) throw EvaluationError("compute_ate: fewer than 3 associated poses");

  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (size_t i = 0; i < n; ++i) {
    src.col(i) = assoc.est[i].t;
    dst.col(i) = assoc.gt[i].t;
  }
  const Eigen::Vector3d mean_src = src.rowwise().mean();
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(src.colwise() - mean_src);
  const auto& sv = svd.singularValues();
  if (sv[0] < 1e-12 || sv[1] < 1e-9 * sv[0])
    throw EvaluationError("compute_ate: degenerate (collinear) trajectory");

  const Eigen::Matrix4d T = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  const Eigen::Matrix3d R = T.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = T.topRightCorner<3, 1>();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += (dst.col(i) - (R * src.col(i) + t)).squaredNorm();
  return std::sqrt(acc / static_cast<double>(n));
}

BiasExperimentResult run_bias_experiment(const BiasExperimentConfig& cfg) {
  if (cfg.trials < 1) throw InvalidInput("run_bias_experiment: trials must be >= 1");
  if (!(cfg.arc > 0.0) || cfg.arc > 2.0 * M_PI + 1e-12)
    throw InvalidInput("run_bias_experiment: arc must lie in (0, 2*pi]");

  const CameraIntrinsics K = cfg.intrinsics();
  CircleScene scene;
  scene.radius = cfg.circle_radius;
  scene.camera_height = cfg.camera_height;

  EdgeMap2D all_edges;
  std::vector<double> angles;
  scene.rasterize(K, &all_edges, &angles);
  const EdgeMap3D model = scene.make_model(K);
  if (model.empty()) throw InvalidInput("run_bias_experiment: circle not visible");

  SolverConfig solver;
  solver.max_iterations = 50;
  solver.fix_rotation = !(cfg.perturb_rotation_deg > 0.0);
  const WeightFunction weight = WeightFunction::none();  // bias must stay visible

  BiasExperimentResult result;
  for (FieldKind m : cfg.methods) result.methods.push_back({m, std::vector<double>(cfg.trials), 0, 0, 0});

  const bool full_circle = cfg.arc >= 2.0 * M_PI - 1e-9;
  parallel_for(0, cfg.trials, [&](int trial) {
    std::seed_seq seq{static_cast<uint64_t>(cfg.seed), static_cast<uint64_t>(trial)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Random arc position, rejected until the whole arc projects in-image.
    double start = 0.0;
    if (!full_circle) {
      for (int attempt = 0; attempt < 1000; ++attempt) {
        start = uni(rng) * 2.0 * M_PI;
        if (scene.arc_fully_visible(K, start, cfg.arc)) break;
      }
    }
    EdgeMap2D data;
    data.width = all_edges.width;
    data.height = all_edges.height;
    for (size_t i = 0; i < all_edges.size(); ++i) {
      double d = std::fmod(angles[i] - start, 2.0 * M_PI);
      if (d < 0) d += 2.0 * M_PI;
      if (full_circle || d <= cfg.arc) {
        data.pixels.push_back(all_edges.pixels[i]);
        data.grad_dir.push_back(all_edges.grad_dir[i]);
        data.bin.push_back(all_edges.bin[i]);
      }
    }

    // Perturbation: translation uniform in a ball, rotation uniform axis with
    // angle uniform in [0, max]; the ground-truth relative pose is identity.
    Eigen::Vector3d dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const double radius = cfg.perturb_translation * std::cbrt(uni(rng));
    Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
    axis.normalize();
    const double angle = cfg.perturb_rotation_deg * M_PI / 180.0 * uni(rng);
    Pose init;
    init.t = radius * dir;
    init.rot = CayleyRotation::from_vec(std::tan(0.5 * angle) * axis);

    for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      FieldVariant field;
      try {
        field = compute_field(data, cfg.methods[mi], cfg.truncation);
      } catch (const Error&) {
        result.methods[mi].errors[trial] = init.t.norm();  // no data in view
        continue;
      }
      Pose est = init;
      try {
        est = irls_solve(model, field, K, init, weight, solver);
      } catch (const Error&) {
        // Solve failed; score the unimproved pose.
      }
      result.methods[mi].errors[trial] = est.t.norm();
    }
  });

  for (auto& m : result.methods) {
    m.median = percentile(m.errors, 0.5);
    m.q25 = percentile(m.errors, 0.25);
    m.q75 = percentile(m.errors, 0.75);
  }
  return result;
}

}  // namespace edgevo
