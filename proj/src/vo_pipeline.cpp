#include "edgevo/vo_pipeline.hpp"

#include <numeric>

namespace edgevo {

namespace {

std::vector<EdgeMap3D> build_model_pyramid(const EdgeMap3D& level0, int levels) {
  std::vector<EdgeMap3D> pyr;
  pyr.push_back(level0);
  for (int l = 1; l < levels; ++l) {
    const double inv = 1.0 / static_cast<double>(1 << l);
    const size_t target =
        std::max<size_t>(level0.size() >> l, std::min<size_t>(level0.size(), 100));
    EdgeMap3D m;
    for (size_t i : uniform_subsample_indices(level0.size(), target)) {
      m.points.push_back(level0.points[i]);
      m.source_pixel.push_back(level0.source_pixel[i] * inv);
      m.grad_dir.push_back(level0.grad_dir[i]);
      m.depth.push_back(level0.depth[i]);
    }
    pyr.push_back(std::move(m));
  }
  return pyr;
}

double cull_residual(const ReferenceFrame& ref, const Pose& relative_pose, const Point3& p_new,
                     const Pixel& source_pixel, const Eigen::Vector2d& grad, double depth) {
  constexpr double kUnusable = std::numeric_limits<double>::infinity();
  const RigidTransform to_ref = relative_pose.camera_to_reference();
  const Point3 p = to_ref.apply(p_new);
  if (!(p.z() > 0.0)) return kUnusable;
  const Pixel o = project(ref.K, p);

  if (std::holds_alternative<DistanceField>(ref.cull_field)) {
    const auto& df = std::get<DistanceField>(ref.cull_field);
    if (o.x() < 0 || o.y() < 0 || o.x() > df.width() - 1.0 || o.y() > df.height() - 1.0)
      return kUnusable;
    const double d = sample_edf_bilinear(df, o);
    return d >= df.truncation ? kUnusable : d;
  }

  std::optional<NearestResult> lookup;
  if (std::holds_alternative<NNField>(ref.cull_field)) {
    lookup = nearest(std::get<NNField>(ref.cull_field), o);
  } else {
    const Eigen::Vector2d g = warp_gradient(relative_pose, ref.K, source_pixel, grad, depth);
    const int bin = orientation_bin(g);
    if (std::holds_alternative<OrientedNNField>(ref.cull_field))
      lookup = nearest(std::get<OrientedNNField>(ref.cull_field), o, bin);
    else
      lookup = nearest(std::get<AdaptiveNNField>(ref.cull_field), o, bin);
  }
  if (!lookup || !lookup->valid) return kUnusable;
  return (o - lookup->nn).norm();
}

}  // namespace

Pose scale_motion(const Pose& motion, double alpha) {
  Pose out;
  out.t = alpha * motion.t;
  out.rot = CayleyRotation::from_vec(alpha * motion.rot.vec());
  return out;
}

RigidTransform predict_pose(const TrackerState& state) {
  if (!state.motion.last_relative) return state.last_pose;
  const Pose scaled = scale_motion(*state.motion.last_relative, state.motion.alpha);
  return state.last_pose.compose(scaled.camera_to_reference());
}

bool should_switch_reference(const TrackerConfig& cfg, const TrackQuality& quality) {
  return quality.median_disparity > cfg.keyframe_disparity ||
         quality.valid_fraction < cfg.min_valid_fraction;
}

EdgeMap3D cull_points(const EdgeMap3D& new_model, const ReferenceFrame& nearest_ref,
                      const Pose& relative_pose) {
  const size_t n = new_model.size();
  if (n == 0) return new_model;

  std::vector<double> residual(n);
  for (size_t i = 0; i < n; ++i)
    residual[i] = cull_residual(nearest_ref, relative_pose, new_model.points[i],
                                new_model.source_pixel[i], new_model.grad_dir[i],
                                new_model.depth[i]);

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  const size_t keep = (n + 1) / 2;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return residual[a] < residual[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());

  EdgeMap3D out;
  for (size_t i : order) {
    out.points.push_back(new_model.points[i]);
    out.source_pixel.push_back(new_model.source_pixel[i]);
    out.grad_dir.push_back(new_model.grad_dir[i]);
    out.depth.push_back(new_model.depth[i]);
  }
  return out;
}

std::shared_ptr<const ReferenceFrame> create_reference_frame(
    const GrayImage& gray, const DepthImage& depth, const RigidTransform& world_pose,
    double timestamp, const TrackerConfig& cfg, const ReferenceFrame* nearest_ref,
    const Pose& relative_pose) {
  const GradientMap grad = compute_gradients(gray);
  const EdgeMap2D edges = canny_edges(grad, cfg.canny);
  if (edges.empty()) throw ReferenceCreationError("reference frame has no edges");

  EdgeMap3D model = build_edge_map_3d(edges, depth, cfg.K, cfg.max_model_points);
  if (model.empty()) throw ReferenceCreationError("reference frame has no valid depths");
  if (nearest_ref) model = cull_points(model, *nearest_ref, relative_pose);
  if (model.size() < 10) throw ReferenceCreationError("reference model too small after culling");

  auto ref = std::make_shared<ReferenceFrame>();
  ref->world_pose = world_pose;
  ref->timestamp = timestamp;
  ref->K = cfg.K;
  ref->edges = edges;
  ref->cull_field =
      compute_field(edges, cfg.solver.field, cfg.solver.truncation[0], cfg.solver.adaptive);
  ref->model_pyramid = build_model_pyramid(model, cfg.solver.pyramid_levels);
  return ref;
}

std::vector<FieldVariant> build_field_pyramid(const GrayImage& gray, const TrackerConfig& cfg,
                                              std::vector<EdgeMap2D>* edge_maps) {
  const int levels = cfg.solver.pyramid_levels;
  const auto images = build_image_pyramid(gray, levels);
  std::vector<FieldVariant> fields;
  for (int l = 0; l < levels; ++l) {
    const GradientMap grad = compute_gradients(images[l]);
    EdgeMap2D edges = canny_edges(grad, cfg.canny);
    const double t = cfg.solver.truncation[std::min<size_t>(l, cfg.solver.truncation.size() - 1)];
    fields.push_back(compute_field(edges, cfg.solver.field, t, cfg.solver.adaptive));
    if (edge_maps) edge_maps->push_back(std::move(edges));
  }
  return fields;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.K.validate();
  for (int l = 0; l < cfg_.solver.pyramid_levels; ++l) K_pyramid_.push_back(cfg_.K.scaled(l));
  state_.motion.alpha = cfg_.motion_decay;
}

Tracker::~Tracker() {
  if (pending_.valid()) pending_.wait();
}

void Tracker::register_keyframe(const std::shared_ptr<const ReferenceFrame>& ref) {
  std::vector<Point3> pts;
  pts.reserve(ref->model_pyramid[0].size());
  for (const Point3& p : ref->model_pyramid[0].points) pts.push_back(ref->world_pose.apply(p));
  keyframe_points_.emplace_back(ref->world_pose, std::move(pts));
}

void Tracker::adopt_pending_reference() {
  if (!pending_.valid() ||
      pending_.wait_for(std::chrono::seconds(0)) != std::future_status::ready)
    return;
  try {
    auto ref = pending_.get();
    if (ref) {
      state_.reference = ref;
      register_keyframe(ref);
    }
  } catch (const Error&) {
    // Keep tracking against the old reference.
  }
}

void Tracker::request_reference(const GrayImage& gray, const DepthImage& depth,
                                const RigidTransform& world_pose, double timestamp,
                                const Pose& relative_pose) {
  if (!cfg_.async_reference) {
    try {
      auto ref = create_reference_frame(gray, depth, world_pose, timestamp, cfg_,
                                        state_.reference.get(), relative_pose);
      state_.reference = ref;
      register_keyframe(ref);
    } catch (const Error&) {
    }
    return;
  }
  if (pending_.valid()) return;  // one preparation in flight at a time
  auto nearest = state_.reference;
  TrackerConfig cfg = cfg_;
  pending_ = std::async(std::launch::async,
                        [gray, depth, world_pose, timestamp, cfg, nearest, relative_pose]() {
                          return create_reference_frame(gray, depth, world_pose, timestamp, cfg,
                                                        nearest.get(), relative_pose);
                        });
}

TrackedFrame Tracker::process_frame(const GrayImage& gray, const DepthImage& depth,
                                    double timestamp) {
  if (!state_.trajectory.empty() && timestamp <= state_.trajectory.back().timestamp)
    throw InvalidInput("process_frame: timestamps must be strictly increasing");

  adopt_pending_reference();

  TrackedFrame frame;
  frame.timestamp = timestamp;

  if (!state_.reference) {
    try {
      auto ref = create_reference_frame(gray, depth, RigidTransform::identity(), timestamp, cfg_);
      state_.reference = ref;
      register_keyframe(ref);
      state_.last_pose = RigidTransform::identity();
      frame.pose = state_.last_pose;
      frame.quality.valid_fraction = 1.0;
    } catch (const Error&) {
      frame.pose = state_.last_pose;
      frame.quality.lost = true;
    }
    state_.trajectory.push_back(frame);
    return frame;
  }

  const ReferenceFrame& ref = *state_.reference;
  const RigidTransform predicted = predict_pose(state_);
  const Pose init = Pose::from_transform(ref.world_pose.inverse().compose(predicted));

  try {
    const std::vector<FieldVariant> fields = build_field_pyramid(gray, cfg_);
    SolveDiagnostics diag;
    const Pose theta =
        pyramid_register(ref.model_pyramid, fields, K_pyramid_, init, cfg_.weight, cfg_.solver,
                         &diag);

    // Quality: median disparity between the reference edges and their
    // reprojections, plus the surviving residual fraction.
    const Residuals res = compute_residuals(ref.model_pyramid[0], theta, fields[0], cfg_.K,
                                            cfg_.solver.min_valid_residuals);
    std::vector<double> disparities;
    for (size_t i = 0; i < res.size(); ++i)
      if (res.valid[i])
        disparities.push_back(
            (res.reprojected[i] - ref.model_pyramid[0].source_pixel[i]).norm());
    std::nth_element(disparities.begin(), disparities.begin() + disparities.size() / 2,
                     disparities.end());
    frame.quality.median_disparity = disparities[disparities.size() / 2];
    frame.quality.valid_fraction =
        static_cast<double>(res.valid_count) / static_cast<double>(ref.model_pyramid[0].size());
    frame.quality.iterations = diag.iterations;
    frame.quality.weighted_rms = diag.final_weighted_rms;

    const RigidTransform world = ref.world_pose.compose(theta.camera_to_reference());
    state_.motion.last_relative = Pose::from_transform(state_.last_pose.inverse().compose(world));
    state_.last_pose = world;
    frame.pose = world;
    state_.trajectory.push_back(frame);

    if (cfg_.enable_reference_switching && should_switch_reference(cfg_, frame.quality))
      request_reference(gray, depth, world, timestamp, theta);
  } catch (const Error&) {
    frame.quality.lost = true;
    frame.pose = predicted;
    state_.last_pose = predicted;
    if (state_.motion.last_relative)
      state_.motion.last_relative = scale_motion(*state_.motion.last_relative, cfg_.motion_decay);
    state_.trajectory.push_back(frame);
  }
  return frame;
}

Trajectory Tracker::trajectory_poses() const {
  Trajectory out;
  for (const auto& f : state_.trajectory) out.push_back({f.timestamp, f.pose});
  return out;
}

std::vector<Point3> Tracker::world_points() const {
  std::vector<Point3> out;
  for (const auto& [pose, pts] : keyframe_points_)
    out.insert(out.end(), pts.begin(), pts.end());
  return out;
}

}  // namespace edgevo
