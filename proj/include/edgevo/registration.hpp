#pragma once

#include "edgevo/nn_fields.hpp"

namespace edgevo {

/// Per-model-point residuals with the neighbour / direction bookkeeping the
/// frozen-neighbour Jacobian needs. Invalid entries are excluded from the
/// normal equations.
struct Residuals {
  std::vector<double> r;                      // pixels; 0 for invalid entries
  std::vector<uint8_t> valid;
  std::vector<Eigen::Vector2d> reprojected;   // o_i
  std::vector<Eigen::Vector2d> nn;            // matched data pixel (ANNF/ONNF)
  std::vector<Eigen::Vector2d> direction;     // projection direction g_i or e_k
  std::vector<Point3> point_cam;              // transformed 3D point
  FieldKind mode = FieldKind::ANNF;
  int valid_count = 0;

  size_t size() const { return r.size(); }
  /// ||o_i - nn_i||, the unprojected displacement (ANNF/ONNF only).
  double point_to_point(size_t i) const { return (reprojected[i] - nn[i]).norm(); }
};

enum class WeightKind { None, TukeyLambda, Cauchy, Huber, TDistribution };

/// Robust M-estimator weight omega(r): even, positive, finite at 0.
struct WeightFunction {
  WeightKind kind = WeightKind::TDistribution;
  double k = 1.0;        // Tukey-Lambda / Cauchy / Huber parameter
  double nu = 2.5;       // T-distribution degrees of freedom
  double sigma = 1.0;    // T-distribution scale
  double eps = 1e-4;     // Tukey-Lambda switch threshold
  // Re-estimate the T-distribution scale as 1.4826 * MAD of the current
  // residuals at each IRLS iteration instead of keeping `sigma` fixed.
  bool online_sigma = true;

  double operator()(double r) const;

  static WeightFunction none() { return {WeightKind::None, 0, 0, 0, 1e-4, false}; }
  static WeightFunction t_distribution(double nu, double sigma, bool online = false) {
    return {WeightKind::TDistribution, 0, nu, sigma, 1e-4, online};
  }
  static WeightFunction huber(double k) { return {WeightKind::Huber, k, 0, 0, 1e-4, false}; }
  static WeightFunction cauchy(double k) { return {WeightKind::Cauchy, k, 0, 0, 1e-4, false}; }
  static WeightFunction tukey_lambda(double k, double eps = 1e-4) {
    return {WeightKind::TukeyLambda, k, 0, 0, eps, false};
  }
  /// Default: T-distribution, nu = 2.5, online scale.
  static WeightFunction standard() { return {}; }
};

struct SolverConfig {
  int max_iterations = 50;       // per pyramid level
  double step_tol = 1e-6;        // ||delta theta||_inf
  double rms_tol = 1e-8;         // |change of weighted RMS|
  int max_step_halvings = 5;
  int min_valid_residuals = 10;
  int pyramid_levels = 3;
  std::array<double, 3> truncation = {8.0, 16.0, 32.0};  // per level
  FieldKind field = FieldKind::ONNF;
  AdaptiveOptions adaptive = {true, 3, 2};
  bool rewarp_gradients_each_iteration = false;
  // Optional stochastic schedule: solve the first iterations on 10% / 30% of
  // the model points before switching to all of them.
  bool stochastic_point_schedule = false;
  // Hold the orientation at the initial value and solve for position only
  // (used by the partial-observation bias experiment).
  bool fix_rotation = false;
};

struct IterationRecord {
  int level = 0;
  int iteration = 0;
  double weighted_rms = 0.0;
  double step_norm = 0.0;
  int valid_count = 0;
};

struct SolveDiagnostics {
  int iterations = 0;
  double final_weighted_rms = 0.0;
  int final_valid_count = 0;
  bool converged = false;
  std::vector<IterationRecord> records;
};

struct SensorModelFit {
  WeightKind kind = WeightKind::TDistribution;
  double k = 0.0;
  double nu = 0.0;
  double sigma = 0.0;
  double nll = 0.0;  // negative log-likelihood on the samples
};

/// Reprojects the model at `pose` and evaluates the field residuals:
/// ANNF: r = g^T (o - n(o)) with g the warped unit model gradient;
/// ONNF: the bin is chosen by the warped gradient and the displacement is
/// projected onto the bin center; EDF: bilinearly interpolated unsigned
/// distance. Out-of-image and truncated lookups are invalid. Throws
/// InsufficientOverlap when fewer than min_valid residuals remain.
/// `warped_gradients` overrides the per-call warping (used to keep gradients
/// fixed over a pyramid level).
Residuals compute_residuals(const EdgeMap3D& model, const Pose& pose, const FieldVariant& field,
                            const CameraIntrinsics& K, int min_valid = 10,
                            const std::vector<Eigen::Vector2d>* warped_gradients = nullptr);

/// Warped unit gradients of every model point at `pose`.
std::vector<Eigen::Vector2d> warp_model_gradients(const EdgeMap3D& model, const Pose& pose,
                                                  const CameraIntrinsics& K);

/// Analytic Jacobian of the residuals with the nearest neighbours and
/// projection directions held fixed; rows of invalid residuals are zero.
/// EDF residuals use central differences through the interpolated field and
/// require `field`.
Eigen::MatrixXd compute_jacobian(const EdgeMap3D& model, const Pose& pose,
                                 const Residuals& residuals, const CameraIntrinsics& K,
                                 const FieldVariant* field = nullptr);

/// Per-residual weights; invalid residuals get weight zero. With
/// online_sigma the T-distribution scale is re-estimated from the valid
/// residuals first (returned through sigma_used when non-null).
std::vector<double> robust_weights(const Residuals& residuals, const WeightFunction& w,
                                   double* sigma_used = nullptr);

/// Iteratively re-weighted Gauss-Newton on a single level:
/// residuals -> weights -> Jacobian -> 6x6 normal equations -> update, with a
/// step-halving guard that keeps the weighted objective non-increasing.
Pose irls_solve(const EdgeMap3D& model, const FieldVariant& field, const CameraIntrinsics& K,
                const Pose& init, const WeightFunction& w, const SolverConfig& cfg,
                SolveDiagnostics* diagnostics = nullptr, int level = 0);

/// Coarse-to-fine registration over a field pyramid (level levels-1 down
/// to 0); the estimate of each level seeds the next.
Pose pyramid_register(const std::vector<EdgeMap3D>& model_pyramid,
                      const std::vector<FieldVariant>& field_pyramid,
                      const std::vector<CameraIntrinsics>& K_pyramid, const Pose& init,
                      const WeightFunction& w, const SolverConfig& cfg,
                      SolveDiagnostics* diagnostics = nullptr);

/// Maximum-likelihood fit of a residual distribution (Huber: 75th-percentile
/// scale matching, since it is not a normalized density). Needs >= 1000
/// samples with nonzero spread.
SensorModelFit fit_sensor_model(const std::vector<double>& samples, WeightKind kind);

/// Table-style presets fitted per camera ("freiburg1", "freiburg2",
/// "freiburg3") for paper-faithful runs.
WeightFunction weight_preset(WeightKind kind, const std::string& camera);

}  // namespace edgevo
