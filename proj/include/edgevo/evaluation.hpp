#pragma once

#include "edgevo/dataset_io.hpp"
#include "edgevo/registration.hpp"
#include "edgevo/synthetic.hpp"

namespace edgevo {

struct RpeResult {
  double rmse_rotation_deg_per_s = 0.0;
  double rmse_translation_m_per_s = 0.0;
  int intervals = 0;
};

/// Relative pose error over intervals of `delta` seconds, normalized by the
/// actual interval duration; RMSE over all intervals. Trajectories are
/// associated by nearest timestamp first.
RpeResult compute_rpe(const Trajectory& est, const Trajectory& gt, double delta,
                      double max_dt = 0.02);

/// Absolute trajectory error: positional RMSE after the rigid (rotation +
/// translation) alignment minimizing the squared position error. Needs at
/// least 3 non-collinear associated pairs.
double compute_ate(const Trajectory& est, const Trajectory& gt, double max_dt = 0.02);

/// Controlled partial-observation experiment: a ground-plane circle seen by a
/// downward camera, the reference position perturbed and re-optimized per
/// field kind with robust weighting disabled, keeping only a random arc of
/// the data in view. Reports the translation error of every trial.
///
/// The disturbance is position-only by default (rotation is held at the
/// reference orientation during the solve); a tilt of the camera moves the
/// projected circle by fractions of a pixel and is therefore not recoverable
/// from this scene. Setting perturb_rotation_deg > 0 switches to a full
/// 6-DoF disturbance and solve.
struct BiasExperimentConfig {
  double focal = 500.0;
  int width = 640, height = 480;
  double camera_height = 218.75;
  double circle_radius = 140.0;
  double arc = M_PI / 4.0;
  int trials = 1000;
  // Perturbation: uniform in a translation ball. Kept small enough that every
  // method starts inside the truncation band of the data, so the reported
  // error measures the estimation bias rather than outright divergence.
  double perturb_translation = 1.0;
  double perturb_rotation_deg = 0.0;   // >0 switches to a 6-DoF disturbance/solve
  // All three transformations are truncated identically, like in the
  // tracking pipeline. Unbounded fields make the partial-observation
  // objective collapse (the model can always shrink onto the data).
  double truncation = 8.0;
  uint64_t seed = 7;
  std::vector<FieldKind> methods = {FieldKind::EDF, FieldKind::ANNF, FieldKind::ONNF};

  CameraIntrinsics intrinsics() const {
    return {focal, focal, width / 2.0, height / 2.0, width, height};
  }
};

struct BiasExperimentResult {
  struct MethodResult {
    FieldKind method;
    std::vector<double> errors;  // one per trial, ||t_est - t_gt|| world units
    double median = 0.0;
    double q25 = 0.0, q75 = 0.0;
  };
  std::vector<MethodResult> methods;
};

BiasExperimentResult run_bias_experiment(const BiasExperimentConfig& cfg);

/// Rotation angle of R in degrees.
double rotation_angle_deg(const Eigen::Matrix3d& R);

const char* field_kind_name(FieldKind kind);

}  // namespace edgevo
