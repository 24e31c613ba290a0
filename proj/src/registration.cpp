#include "edgevo/registration.hpp"

#include <functional>
#include <limits>
#include <numeric>

namespace edgevo {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

double weighted_rms(const Residuals& res, const std::vector<double>& weights) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < res.size(); ++i) {
    if (!res.valid[i]) continue;
    num += weights[i] * res.r[i] * res.r[i];
    den += weights[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

// Step-acceptance metric: weighted RMS over the entries valid in both the
// current and the trial residuals, so points drifting in and out of the view
// cannot masquerade as objective changes.
std::pair<double, double> common_set_rms(const Residuals& a, const std::vector<double>& wa,
                                         const Residuals& b, const std::vector<double>& wb) {
  double num_a = 0.0, den_a = 0.0, num_b = 0.0, den_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    num_a += wa[i] * a.r[i] * a.r[i];
    den_a += wa[i];
    num_b += wb[i] * b.r[i] * b.r[i];
    den_b += wb[i];
  }
  if (den_a <= 0.0 || den_b <= 0.0) return {0.0, std::numeric_limits<double>::infinity()};
  return {std::sqrt(num_a / den_a), std::sqrt(num_b / den_b)};
}

// Gauss-Newton update from the normal equations A delta = -b over the free
// parameters. The block mixes translation and Cayley units, so the system is
// Jacobi-scaled to a unit diagonal first; eigendirections that stay
// numerically rank-deficient after scaling are excluded from the step, and a
// genuinely singular system with a non-vanishing gradient raises
// RankDeficient (unobservable motion). Sets diag->converged when the gradient
// itself vanishes.
Eigen::Matrix<double, 6, 1> solve_normal_equations(const Eigen::Matrix<double, 6, 6>& A_full,
                                                   const Eigen::Matrix<double, 6, 1>& b_full,
                                                   bool fix_rotation, SolveDiagnostics* diag) {
  std::vector<int> free_idx;
  for (int i = 0; i < (fix_rotation ? 3 : 6); ++i) free_idx.push_back(i);
  const int n = static_cast<int>(free_idx.size());

  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    b[i] = b_full[free_idx[i]];
    for (int j = 0; j < n; ++j) A(i, j) = A_full(free_idx[i], free_idx[j]);
  }

  const double max_diag = A.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) {
    if (b.lpNorm<Eigen::Infinity>() < 1e-12) {
      diag->converged = true;
      return Eigen::Matrix<double, 6, 1>::Zero();
    }
    throw RankDeficient("irls_solve: empty normal equations");
  }

  Eigen::VectorXd scale(n);
  for (int i = 0; i < n; ++i)
    scale[i] = A(i, i) > 1e-14 * max_diag ? 1.0 / std::sqrt(A(i, i)) : 0.0;
  const Eigen::MatrixXd As = scale.asDiagonal() * A * scale.asDiagonal();
  const Eigen::VectorXd bs = scale.asDiagonal() * b;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(As);
  const auto& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  const bool singular = scale.minCoeff() == 0.0 || lambda.minCoeff() < 1e-13 * lambda_max;

  // Gradient scaled against the problem magnitude: zero gradient at a
  // deficient configuration still counts as converged.
  if (bs.lpNorm<Eigen::Infinity>() < 1e-9 * std::sqrt(max_diag) + 1e-12) {
    diag->converged = true;
    return Eigen::Matrix<double, 6, 1>::Zero();
  }
  if (singular)
    throw RankDeficient("irls_solve: singular normal equations (unobservable motion)");

  Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (lambda[i] < 1e-8 * lambda_max) continue;  // too ill-determined to step along
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    step += v * (v.dot(-bs) / lambda[i]);
  }
  step = scale.asDiagonal() * step;

  Eigen::Matrix<double, 6, 1> out = Eigen::Matrix<double, 6, 1>::Zero();
  for (int i = 0; i < n; ++i) out[free_idx[i]] = step[i];
  return out;
}

std::optional<double> edf_residual(const DistanceField& field, const Pixel& o) {
  if (!(o.x() >= 0.0) || !(o.y() >= 0.0) || !(o.x() <= field.width() - 1.0) ||
      !(o.y() <= field.height() - 1.0))
    return std::nullopt;
  const double d = sample_edf_bilinear(field, o);
  if (d >= field.truncation) return std::nullopt;
  return d;
}

}  // namespace

double WeightFunction::operator()(double r) const {
  switch (kind) {
    case WeightKind::None:
      return 1.0;
    case WeightKind::Huber: {
      const double a = std::fabs(r);
      return a <= k ? 1.0 : k / a;
    }
    case WeightKind::Cauchy: {
      const double x = r / k;
      return 1.0 / (1.0 + x * x);
    }
    case WeightKind::TDistribution: {
      const double x = r / sigma;
      return (nu + 1.0) / (nu + x * x);
    }
    case WeightKind::TukeyLambda: {
      // tanh(r/2k) / (2kr); below the switch point the even Taylor expansion
      // avoids the 0/0 and meets the r -> 0 limit of 1/(4k^2).
      const double a = std::fabs(r);
      if (a <= eps) {
        const double x = a / k;
        return (1.0 - x * x / 12.0) / (4.0 * k * k);
      }
      return std::tanh(a / (2.0 * k)) / (2.0 * k * a);
    }
  }
  return 1.0;
}

std::vector<Eigen::Vector2d> warp_model_gradients(const EdgeMap3D& model, const Pose& pose,
                                                  const CameraIntrinsics& K) {
  std::vector<Eigen::Vector2d> out(model.size());
  for (size_t i = 0; i < model.size(); ++i)
    out[i] = warp_gradient(pose, K, model.source_pixel[i], model.grad_dir[i], model.depth[i]);
  return out;
}

Residuals compute_residuals(const EdgeMap3D& model, const Pose& pose, const FieldVariant& field,
                            const CameraIntrinsics& K, int min_valid,
                            const std::vector<Eigen::Vector2d>* warped_gradients) {
  if (model.empty()) throw InvalidInput("compute_residuals: empty model");

  const size_t n = model.size();
  Residuals res;
  res.r.assign(n, 0.0);
  res.valid.assign(n, 0);
  res.reprojected.assign(n, Eigen::Vector2d::Zero());
  res.nn.assign(n, Eigen::Vector2d::Zero());
  res.direction.assign(n, Eigen::Vector2d::Zero());
  res.point_cam.assign(n, Point3::Zero());

  std::vector<Eigen::Vector2d> computed;
  const bool needs_gradients = !std::holds_alternative<DistanceField>(field);
  if (needs_gradients && !warped_gradients) {
    computed = warp_model_gradients(model, pose, K);
    warped_gradients = &computed;
  }
  if (needs_gradients && warped_gradients->size() != n)
    throw InvalidInput("compute_residuals: warped gradient count mismatch");

  res.mode = std::holds_alternative<DistanceField>(field)  ? FieldKind::EDF
             : std::holds_alternative<NNField>(field)      ? FieldKind::ANNF
                                                           : FieldKind::ONNF;

  const Eigen::Matrix3d Rt = cayley_to_rotation(pose.rot).transpose();
  for (size_t i = 0; i < n; ++i) {
    const Point3 p = Rt * (model.points[i] - pose.t);
    if (!(p.z() > 0.0)) continue;
    const Pixel o(K.fx * p.x() / p.z() + K.cx, K.fy * p.y() / p.z() + K.cy);
    res.point_cam[i] = p;
    res.reprojected[i] = o;

    if (res.mode == FieldKind::EDF) {
      const auto d = edf_residual(std::get<DistanceField>(field), o);
      if (!d) continue;
      res.r[i] = *d;
      res.valid[i] = 1;
      ++res.valid_count;
      continue;
    }

    std::optional<NearestResult> lookup;
    Eigen::Vector2d dir;
    if (res.mode == FieldKind::ANNF) {
      dir = (*warped_gradients)[i];
      lookup = nearest(std::get<NNField>(field), o);
    } else {
      const int bin = orientation_bin((*warped_gradients)[i]);
      dir = orientation_bin_center(bin);
      if (std::holds_alternative<OrientedNNField>(field))
        lookup = nearest(std::get<OrientedNNField>(field), o, bin);
      else
        lookup = nearest(std::get<AdaptiveNNField>(field), o, bin);
    }
    if (!lookup || !lookup->valid) continue;
    res.nn[i] = lookup->nn;
    res.direction[i] = dir;
    res.r[i] = dir.dot(o - lookup->nn);
    res.valid[i] = 1;
    ++res.valid_count;
  }

  if (res.valid_count < min_valid)
    throw InsufficientOverlap("compute_residuals: only " + std::to_string(res.valid_count) +
                              " valid residuals");
  return res;
}

Eigen::MatrixXd compute_jacobian(const EdgeMap3D& model, const Pose& pose,
                                 const Residuals& residuals, const CameraIntrinsics& K,
                                 const FieldVariant* field) {
  const size_t n = model.size();
  if (residuals.size() != n) throw InvalidInput("compute_jacobian: residual count mismatch");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 6);

  if (residuals.mode == FieldKind::EDF) {
    // Numerical Jacobian through the interpolated field (the EDF baseline has
    // no frozen neighbours to differentiate against).
    if (!field || !std::holds_alternative<DistanceField>(*field))
      throw InvalidInput("compute_jacobian: EDF residuals need the distance field");
    const auto& df = std::get<DistanceField>(*field);
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      Eigen::Matrix<double, 6, 1> params = pose.params();
      params[k] += h;
      const Pose plus = Pose::from_params(params);
      params[k] -= 2 * h;
      const Pose minus = Pose::from_params(params);
      const Eigen::Matrix3d Rp = cayley_to_rotation(plus.rot).transpose();
      const Eigen::Matrix3d Rm = cayley_to_rotation(minus.rot).transpose();
      for (size_t i = 0; i < n; ++i) {
        if (!residuals.valid[i]) continue;
        const Point3 pp = Rp * (model.points[i] - plus.t);
        const Point3 pm = Rm * (model.points[i] - minus.t);
        if (!(pp.z() > 0.0) || !(pm.z() > 0.0)) continue;
        const auto dp = edf_residual(df, project(K, pp));
        const auto dm = edf_residual(df, project(K, pm));
        if (!dp || !dm) continue;
        J(static_cast<Eigen::Index>(i), k) = (*dp - *dm) / (2 * h);
      }
    }
    return J;
  }

  // Frozen-neighbour chain: dr/dtheta = dir^T * J_pi * [ -R^T | dR_k^T (s - t) ].
  const Eigen::Matrix3d Rt = cayley_to_rotation(pose.rot).transpose();
  const auto dR = cayley_rotation_derivatives(pose.rot);
  for (size_t i = 0; i < n; ++i) {
    if (!residuals.valid[i]) continue;
    const Point3& p = residuals.point_cam[i];
    const double iz = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> J_pi;
    J_pi << K.fx * iz, 0, -K.fx * p.x() * iz * iz,
            0, K.fy * iz, -K.fy * p.y() * iz * iz;
    Eigen::Matrix<double, 3, 6> J_x;
    J_x.block<3, 3>(0, 0) = -Rt;
    const Point3 u = model.points[i] - pose.t;
    for (int k = 0; k < 3; ++k) J_x.col(3 + k) = dR[k].transpose() * u;
    J.row(static_cast<Eigen::Index>(i)) = residuals.direction[i].transpose() * J_pi * J_x;
  }
  return J;
}

std::vector<double> robust_weights(const Residuals& residuals, const WeightFunction& w,
                                   double* sigma_used) {
  WeightFunction wf = w;
  if (w.kind == WeightKind::TDistribution && w.online_sigma) {
    std::vector<double> vals;
    vals.reserve(residuals.size());
    for (size_t i = 0; i < residuals.size(); ++i)
      if (residuals.valid[i]) vals.push_back(residuals.r[i]);
    const double med = median_of(vals);
    for (double& v : vals) v = std::fabs(v - med);
    wf.sigma = std::max(1.4826 * median_of(vals), 1e-9);
  }
  if (sigma_used) *sigma_used = wf.sigma;

  std::vector<double> out(residuals.size(), 0.0);
  for (size_t i = 0; i < residuals.size(); ++i)
    if (residuals.valid[i]) out[i] = wf(residuals.r[i]);
  return out;
}

namespace {

EdgeMap3D subsample_model(const EdgeMap3D& model, const std::vector<size_t>& idx) {
  EdgeMap3D out;
  out.points.reserve(idx.size());
  for (size_t i : idx) {
    out.points.push_back(model.points[i]);
    out.source_pixel.push_back(model.source_pixel[i]);
    out.grad_dir.push_back(model.grad_dir[i]);
    out.depth.push_back(model.depth[i]);
  }
  return out;
}

}  // namespace

Pose irls_solve(const EdgeMap3D& model, const FieldVariant& field, const CameraIntrinsics& K,
                const Pose& init, const WeightFunction& w, const SolverConfig& cfg,
                SolveDiagnostics* diagnostics, int level) {
  if (model.empty()) throw InvalidInput("irls_solve: empty model");

  Pose theta = init;
  std::vector<Eigen::Vector2d> warped = warp_model_gradients(model, theta, K);

  // Optional stochastic schedule over the model points.
  auto active_fraction = [&](int iter) {
    if (!cfg.stochastic_point_schedule) return 1.0;
    return iter == 0 ? 0.10 : (iter == 1 ? 0.30 : 1.0);
  };

  SolveDiagnostics diag;
  double prev_fraction = -1.0;
  int initial_valid = 0;
  EdgeMap3D active;
  std::vector<Eigen::Vector2d> active_warped;
  const EdgeMap3D* active_model = &model;
  const std::vector<Eigen::Vector2d>* active_grads = &warped;

  Residuals res;
  std::vector<double> weights;
  double obj = 0.0;
  bool have_res = false;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const double frac = active_fraction(iter);
    if (frac != prev_fraction) {
      if (frac >= 1.0) {
        active_model = &model;
        active_grads = &warped;
      } else {
        const auto idx = uniform_subsample_indices(
            model.size(), std::max<size_t>(cfg.min_valid_residuals,
                                           static_cast<size_t>(frac * model.size())));
        active = subsample_model(model, idx);
        active_warped.clear();
        for (size_t i : idx) active_warped.push_back(warped[i]);
        active_model = &active;
        active_grads = &active_warped;
      }
      prev_fraction = frac;
      have_res = false;
    }
    if (!have_res) {
      res = compute_residuals(*active_model, theta, field, K, cfg.min_valid_residuals,
                              active_grads);
      weights = robust_weights(res, w);
      obj = weighted_rms(res, weights);
      have_res = true;
      initial_valid = res.valid_count;
    }

    const Eigen::MatrixXd J = compute_jacobian(*active_model, theta, res, K, &field);
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
    for (size_t i = 0; i < res.size(); ++i) {
      if (!res.valid[i]) continue;
      const Eigen::Matrix<double, 1, 6> row = J.row(static_cast<Eigen::Index>(i));
      A += weights[i] * row.transpose() * row;
      b += weights[i] * row.transpose() * res.r[i];
    }
    const Eigen::Matrix<double, 6, 1> delta = solve_normal_equations(A, b, cfg.fix_rotation, &diag);
    ++diag.iterations;
    if (diag.converged) break;  // vanishing gradient along the observable directions

    if (delta.lpNorm<Eigen::Infinity>() < cfg.step_tol) {
      theta = Pose::from_params(theta.params() + delta);
      diag.converged = true;
      diag.records.push_back({level, iter, obj, delta.lpNorm<Eigen::Infinity>(),
                              res.valid_count});
      break;
    }

    // Plain Gauss-Newton step with a halving guard that keeps the weighted
    // objective non-increasing.
    double alpha = 1.0;
    bool accepted = false;
    Residuals trial_res;
    std::vector<double> trial_weights;
    double trial_obj = 0.0;
    Pose trial;
    for (int halve = 0; halve <= cfg.max_step_halvings; ++halve) {
      trial = Pose::from_params(theta.params() + alpha * delta);
      try {
        trial_res = compute_residuals(*active_model, trial, field, K, cfg.min_valid_residuals,
                                      active_grads);
      } catch (const InsufficientOverlap&) {
        alpha *= 0.5;
        continue;
      }
      trial_weights = robust_weights(trial_res, w);
      trial_obj = weighted_rms(trial_res, trial_weights);
      const auto [cur_common, trial_common] = common_set_rms(res, weights, trial_res, trial_weights);
      // A step must not shed the registration's support: losing residuals can
      // make any pose look good on the survivors.
      const bool support_ok = 2 * trial_res.valid_count >= initial_valid;
      if (support_ok && trial_common <= cur_common + 1e-12) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      diag.converged = true;  // objective cannot be decreased further
      break;
    }

    const double d_obj = obj - trial_obj;
    theta = trial;
    res = std::move(trial_res);
    weights = std::move(trial_weights);
    obj = trial_obj;
    diag.records.push_back({level, iter, obj, (alpha * delta).lpNorm<Eigen::Infinity>(),
                            res.valid_count});

    if ((alpha * delta).lpNorm<Eigen::Infinity>() < cfg.step_tol ||
        std::fabs(d_obj) < cfg.rms_tol) {
      diag.converged = true;
      break;
    }
    if (cfg.rewarp_gradients_each_iteration) {
      warped = warp_model_gradients(model, theta, K);
      prev_fraction = -1.0;  // refresh the active subset's gradients
      have_res = false;
    }
  }

  diag.final_weighted_rms = obj;
  diag.final_valid_count = res.valid_count;
  if (diagnostics) {
    diagnostics->iterations += diag.iterations;
    diagnostics->final_weighted_rms = diag.final_weighted_rms;
    diagnostics->final_valid_count = diag.final_valid_count;
    diagnostics->converged = diag.converged;
    diagnostics->records.insert(diagnostics->records.end(), diag.records.begin(),
                                diag.records.end());
  }
  return theta;
}

Pose pyramid_register(const std::vector<EdgeMap3D>& model_pyramid,
                      const std::vector<FieldVariant>& field_pyramid,
                      const std::vector<CameraIntrinsics>& K_pyramid, const Pose& init,
                      const WeightFunction& w, const SolverConfig& cfg,
                      SolveDiagnostics* diagnostics) {
  const size_t levels = model_pyramid.size();
  if (levels == 0 || field_pyramid.size() != levels || K_pyramid.size() != levels)
    throw InvalidInput("pyramid_register: inconsistent pyramids");

  Pose theta = init;
  for (int l = static_cast<int>(levels) - 1; l >= 0; --l)
    theta = irls_solve(model_pyramid[l], field_pyramid[l], K_pyramid[l], theta, w, cfg,
                       diagnostics, l);
  return theta;
}

// --- Sensor-model fitting -------------------------------------------------

namespace {

double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-9) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Minimal Nelder-Mead for the 2-parameter T-distribution fit.
Eigen::Vector2d nelder_mead_2d(const std::function<double(const Eigen::Vector2d&)>& f,
                               Eigen::Vector2d x0, double scale, int max_iter = 400) {
  std::array<Eigen::Vector2d, 3> xs = {x0, x0 + Eigen::Vector2d(scale, 0),
                                       x0 + Eigen::Vector2d(0, scale)};
  std::array<double, 3> fs = {f(xs[0]), f(xs[1]), f(xs[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> ord = {0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
    const Eigen::Vector2d best = xs[ord[0]], mid = xs[ord[1]], worst = xs[ord[2]];
    if ((best - worst).norm() < 1e-10 && std::fabs(fs[ord[0]] - fs[ord[2]]) < 1e-12) break;
    const Eigen::Vector2d centroid = 0.5 * (best + mid);
    const Eigen::Vector2d refl = centroid + (centroid - worst);
    const double f_refl = f(refl);
    if (f_refl < fs[ord[0]]) {
      const Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - worst);
      const double f_exp = f(exp_pt);
      xs[ord[2]] = f_exp < f_refl ? exp_pt : refl;
      fs[ord[2]] = std::min(f_exp, f_refl);
    } else if (f_refl < fs[ord[1]]) {
      xs[ord[2]] = refl;
      fs[ord[2]] = f_refl;
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (worst - centroid);
      const double f_contr = f(contr);
      if (f_contr < fs[ord[2]]) {
        xs[ord[2]] = contr;
        fs[ord[2]] = f_contr;
      } else {
        xs[ord[1]] = best + 0.5 * (xs[ord[1]] - best);
        xs[ord[2]] = best + 0.5 * (xs[ord[2]] - best);
        fs[ord[1]] = f(xs[ord[1]]);
        fs[ord[2]] = f(xs[ord[2]]);
      }
    }
  }
  const int best = fs[0] <= fs[1] && fs[0] <= fs[2] ? 0 : (fs[1] <= fs[2] ? 1 : 2);
  return xs[best];
}

double quantile_abs(const std::vector<double>& samples, double q) {
  std::vector<double> a;
  a.reserve(samples.size());
  for (double s : samples) a.push_back(std::fabs(s));
  const size_t k = static_cast<size_t>(q * (a.size() - 1));
  std::nth_element(a.begin(), a.begin() + k, a.end());
  return a[k];
}

}  // namespace

SensorModelFit fit_sensor_model(const std::vector<double>& samples, WeightKind kind) {
  if (samples.size() < 1000) throw InvalidInput("fit_sensor_model: need >= 1000 samples");
  const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
  if (!(*mx > *mn)) throw InvalidInput("fit_sensor_model: degenerate samples (no spread)");
  const double n = static_cast<double>(samples.size());

  SensorModelFit fit;
  fit.kind = kind;
  switch (kind) {
    case WeightKind::TDistribution: {
      auto nll = [&](const Eigen::Vector2d& p) {
        const double nu = std::exp(p[0]), sigma = std::exp(p[1]);
        double acc = n * (-std::lgamma(0.5 * (nu + 1)) + std::lgamma(0.5 * nu) +
                          0.5 * std::log(nu * M_PI) + std::log(sigma));
        for (double s : samples) {
          const double x = s / sigma;
          acc += 0.5 * (nu + 1) * std::log1p(x * x / nu);
        }
        return acc;
      };
      std::vector<double> med = samples;
      const double center = median_of(med);
      for (double& v : med) v = std::fabs(v - center);
      const double sigma0 = std::max(1.4826 * median_of(med), 1e-6);
      const Eigen::Vector2d p =
          nelder_mead_2d(nll, {std::log(3.0), std::log(sigma0)}, 0.5);
      fit.nu = std::exp(p[0]);
      fit.sigma = std::exp(p[1]);
      fit.nll = nll(p);
      break;
    }
    case WeightKind::Cauchy: {
      auto nll = [&](double logk) {
        const double k = std::exp(logk);
        double acc = n * std::log(M_PI * k);
        for (double s : samples) acc += std::log1p((s / k) * (s / k));
        return acc;
      };
      const double logk = golden_minimize(nll, std::log(1e-4), std::log(1e4));
      fit.k = std::exp(logk);
      fit.nll = nll(logk);
      break;
    }
    case WeightKind::TukeyLambda: {
      // Lambda = 0 closed form, i.e. the Logistic distribution with scale k.
      auto nll = [&](double logk) {
        const double k = std::exp(logk);
        double acc = n * std::log(k);
        for (double s : samples) {
          const double y = std::fabs(s) / (2.0 * k);
          acc += 2.0 * (y + std::log1p(std::exp(-2.0 * y)));  // 2 log(2 cosh y)
        }
        return acc;
      };
      const double logk = golden_minimize(nll, std::log(1e-4), std::log(1e4));
      fit.k = std::exp(logk);
      fit.nll = nll(logk);
      break;
    }
    case WeightKind::Huber: {
      // Not a normalized family; scale matched at the 75th percentile of |r|,
      // NLL reported against the induced density exp(-rho(r)) / Z.
      const double k = std::max(quantile_abs(samples, 0.75), 1e-9);
      const double Z = std::sqrt(2.0 * M_PI) * std::erf(k / std::sqrt(2.0)) +
                       (2.0 / k) * std::exp(-0.5 * k * k);
      double acc = n * std::log(Z);
      for (double s : samples) {
        const double a = std::fabs(s);
        acc += a <= k ? 0.5 * a * a : k * a - 0.5 * k * k;
      }
      fit.k = k;
      fit.nll = acc;
      break;
    }
    case WeightKind::None:
      throw InvalidInput("fit_sensor_model: nothing to fit for WeightKind::None");
  }
  return fit;
}

WeightFunction weight_preset(WeightKind kind, const std::string& camera) {
  struct Row {
    const char* name;
    double tukey_k, cauchy_k, huber_k, nu, sigma;
  };
  static const Row rows[] = {
      {"freiburg1", 0.8368, 0.9701, 1.1426, 2.2875, 1.1050},
      {"freiburg2", 0.7909, 0.9102, 1.1710, 2.7104, 1.0682},
      {"freiburg3", 0.6540, 0.7217, 1.4425, 2.4621, 0.8330},
  };
  for (const Row& row : rows) {
    if (camera != row.name) continue;
    switch (kind) {
      case WeightKind::TukeyLambda:
        return WeightFunction::tukey_lambda(row.tukey_k);
      case WeightKind::Cauchy:
        return WeightFunction::cauchy(row.cauchy_k);
      case WeightKind::Huber:
        return WeightFunction::huber(row.huber_k);
      case WeightKind::TDistribution:
        return WeightFunction::t_distribution(row.nu, row.sigma);
      case WeightKind::None:
        return WeightFunction::none();
    }
  }
  throw InvalidInput("weight_preset: unknown camera '" + camera + "'");
}

}  // namespace edgevo
