#include <doctest.h>

#include <map>

#include "edgevo/evaluation.hpp"
#include "edgevo/synthetic.hpp"
#include "edgevo/vo_pipeline.hpp"
#include "helpers.hpp"

using namespace edgevo;

namespace {

const CameraIntrinsics kCam{250.0, 250.0, 160.0, 120.0, 320, 240};

TrackerConfig test_config(FieldKind kind = FieldKind::ONNF) {
  TrackerConfig cfg;
  cfg.K = kCam;
  cfg.solver.field = kind;
  cfg.solver.adaptive.enabled = kind == FieldKind::ONNF;
  cfg.async_reference = false;
  return cfg;
}

RigidTransform camera_at(double x, double y, double yaw_deg) {
  RigidTransform p;
  p.t = {x, y, 0.0};
  p.R = Eigen::AngleAxisd(yaw_deg * M_PI / 180.0, Eigen::Vector3d::UnitY()).toRotationMatrix();
  return p;
}

}  // namespace

TEST_CASE("predict_pose: no history, decayed motion, exact extrapolation") {
  TrackerState state;
  state.last_pose = camera_at(1.0, 0.5, 10.0);

  // No history: the last pose is returned unchanged.
  CHECK((predict_pose(state).t - state.last_pose.t).norm() < 1e-15);

  Pose motion;
  motion.t = {0.1, 0.0, 0.02};
  motion.rot = {0.01, 0.0, 0.0};
  state.motion.last_relative = motion;

  // alpha = 0 also returns the last pose.
  state.motion.alpha = 0.0;
  CHECK((predict_pose(state).t - state.last_pose.t).norm() < 1e-15);
  CHECK((predict_pose(state).R - state.last_pose.R).lpNorm<Eigen::Infinity>() < 1e-15);

  // alpha = 1 extrapolates constant motion exactly.
  state.motion.alpha = 1.0;
  const RigidTransform expected = state.last_pose.compose(motion.camera_to_reference());
  CHECK((predict_pose(state).t - expected.t).norm() < 1e-12);
  CHECK((predict_pose(state).R - expected.R).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("should_switch_reference: threshold semantics") {
  const TrackerConfig cfg = test_config();
  TrackQuality q;
  q.median_disparity = 0.0;
  q.valid_fraction = 1.0;
  CHECK(!should_switch_reference(cfg, q));
  q.median_disparity = cfg.keyframe_disparity + 1.0;
  CHECK(should_switch_reference(cfg, q));
  q.median_disparity = 0.0;
  q.valid_fraction = 0.3;
  CHECK(should_switch_reference(cfg, q));
}

TEST_CASE("cull_points: median semantics, outliers, sort order") {
  const TrackerConfig cfg = test_config(FieldKind::ANNF);
  const EdgeScene scene = make_box_scene();

  // Nearest reference at the identity; the new frame slightly displaced.
  ReferenceFrame ref;
  ref.K = kCam;
  ref.world_pose = RigidTransform::identity();
  ref.edges = scene.render_edges(kCam, RigidTransform::identity());
  ref.cull_field = compute_annf(ref.edges, 16.0);

  Pose rel;
  rel.t = {0.2, 0.05, 0.0};
  EdgeMap3D model = scene.make_model(kCam, rel.camera_to_reference());
  const size_t n = model.size();

  // Clean model: exactly ceil(N/2) survive.
  const EdgeMap3D clean = cull_points(model, ref, rel);
  CHECK(clean.size() == (n + 1) / 2);

  // One gross outlier is always culled for N >= 3.
  EdgeMap3D tiny;
  for (size_t i = 0; i < 5; ++i) {
    tiny.points.push_back(model.points[i]);
    tiny.source_pixel.push_back(model.source_pixel[i]);
    tiny.grad_dir.push_back(model.grad_dir[i]);
    tiny.depth.push_back(model.depth[i]);
  }
  tiny.points[2] *= 1.8;  // corrupt depth along the ray
  tiny.depth[2] *= 1.8;
  const EdgeMap3D survivors = cull_points(tiny, ref, rel);
  CHECK(survivors.size() == 3);
  for (const auto& p : survivors.points) CHECK((p - tiny.points[2]).norm() > 1e-12);

  // Corrupted half dominates the culled set.
  EdgeMap3D half = model;
  const size_t n_corrupt = half.size() / 2;
  for (size_t i = 0; i < n_corrupt; ++i) {
    const double f = 1.0 + 0.5 / half.depth[i];  // +0.5 depth units
    half.points[i] *= f;
    half.depth[i] *= f;
  }
  const EdgeMap3D culled = cull_points(half, ref, rel);
  // Survivors that kept an uncorrupted depth, identified via source pixels.
  std::map<std::pair<double, double>, double> original_depth;
  for (size_t i = 0; i < model.size(); ++i)
    original_depth[{model.source_pixel[i].x(), model.source_pixel[i].y()}] = model.depth[i];
  size_t corrupt_kept = 0;
  for (size_t i = 0; i < culled.size(); ++i) {
    const double orig = original_depth[{culled.source_pixel[i].x(), culled.source_pixel[i].y()}];
    if (std::fabs(culled.depth[i] - orig) > 1e-9) ++corrupt_kept;
  }
  // Corrupted points dominate the above-median residual set.
  CHECK(corrupt_kept < culled.size() / 4);
}

TEST_CASE("create_reference_frame: first frame keeps the full model, bad input raises") {
  const TrackerConfig cfg = test_config(FieldKind::ANNF);
  GrayImage gray;
  DepthImage depth;
  render_quads(make_shaded_box_scene(), kCam, RigidTransform::identity(), &gray, &depth);

  const auto ref = create_reference_frame(gray, depth, RigidTransform::identity(), 0.0, cfg);
  REQUIRE(ref);
  CHECK(ref->model_pyramid.size() == 3);
  for (const auto& level : ref->model_pyramid) CHECK(!level.empty());

  // All model points reproject inside the reference image at the identity.
  for (size_t i = 0; i < ref->model_pyramid[0].size(); ++i) {
    const Pixel px = project(kCam, ref->model_pyramid[0].points[i]);
    CHECK(px.x() >= 0.0);
    CHECK(px.x() <= kCam.width - 1.0);
    CHECK(px.y() >= 0.0);
    CHECK(px.y() <= kCam.height - 1.0);
  }

  const GrayImage black(320, 240, 0.0f);
  CHECK_THROWS_AS(
      create_reference_frame(black, depth, RigidTransform::identity(), 0.0, cfg),
      ReferenceCreationError);
}

TEST_CASE("tracker: re-seeing the reference image returns the identity") {
  for (FieldKind kind : {FieldKind::ANNF, FieldKind::ONNF, FieldKind::EDF}) {
    Tracker tracker(test_config(kind));
    GrayImage gray;
    DepthImage depth;
    render_quads(make_shaded_box_scene(), kCam, RigidTransform::identity(), &gray, &depth);

    tracker.process_frame(gray, depth, 0.0);
    const TrackedFrame f = tracker.process_frame(gray, depth, 0.1);
    CHECK(!f.quality.lost);
    CHECK(f.quality.median_disparity < 0.01);
    CHECK(f.pose.t.norm() < 1e-6);
  }
}

TEST_CASE("tracker: all-black frame reports tracking lost") {
  Tracker tracker(test_config(FieldKind::ANNF));
  GrayImage gray;
  DepthImage depth;
  render_quads(make_shaded_box_scene(), kCam, RigidTransform::identity(), &gray, &depth);
  tracker.process_frame(gray, depth, 0.0);

  const GrayImage black(320, 240, 0.0f);
  const TrackedFrame f = tracker.process_frame(black, depth, 0.1);
  CHECK(f.quality.lost);
}

TEST_CASE("tracker: timestamps must strictly increase") {
  Tracker tracker(test_config(FieldKind::ANNF));
  GrayImage gray;
  DepthImage depth;
  render_quads(make_shaded_box_scene(), kCam, RigidTransform::identity(), &gray, &depth);
  tracker.process_frame(gray, depth, 0.0);
  CHECK_THROWS_AS(tracker.process_frame(gray, depth, 0.0), InvalidInput);
}

TEST_CASE("tracker: no spontaneous drift over repeated identical frames") {
  TrackerConfig cfg = test_config(FieldKind::ANNF);
  cfg.enable_reference_switching = false;
  Tracker tracker(cfg);
  GrayImage gray;
  DepthImage depth;
  render_quads(make_shaded_box_scene(), kCam, RigidTransform::identity(), &gray, &depth);
  for (int i = 0; i <= 100; ++i) tracker.process_frame(gray, depth, 0.1 * i);
  const auto& traj = tracker.trajectory();
  CHECK(traj.back().pose.t.norm() < 1e-6);
  CHECK(rotation_angle_deg(traj.back().pose.R) < 1e-6);
  for (size_t i = 1; i < traj.size(); ++i)
    CHECK(traj[i].timestamp > traj[i - 1].timestamp);
}

TEST_CASE("tracker: synthetic sequence with known motion") {
  // Full VGA image pipeline: render, Canny, depth lookup, fields, pyramid
  // registration, keyframing. Integer-pixel edge maps bound the per-solve
  // precision, so the oracle checks the per-frame relative motion against
  // 0.1% of the 6-unit scene depth.
  const CameraIntrinsics K{500.0, 500.0, 320.0, 240.0, 640, 480};
  TrackerConfig cfg = test_config(FieldKind::ONNF);
  cfg.K = K;
  Tracker tracker(cfg);
  const auto quads = make_shaded_box_scene();

  RigidTransform prev_gt, prev_est;
  std::vector<double> rel_errors;
  double max_abs = 0.0;
  int lost = 0;
  for (int i = 0; i < 15; ++i) {
    const RigidTransform gt = camera_at(0.006 * i, 0.002 * i, 0.03 * i);
    GrayImage gray;
    DepthImage depth;
    render_quads(quads, K, gt, &gray, &depth);
    const TrackedFrame f = tracker.process_frame(gray, depth, 0.1 * i);
    if (f.quality.lost) ++lost;
    if (i > 0) {
      const RigidTransform rel_gt = prev_gt.inverse().compose(gt);
      const RigidTransform rel_est = prev_est.inverse().compose(f.pose);
      rel_errors.push_back((rel_est.t - rel_gt.t).norm());
    }
    max_abs = std::max(max_abs, (f.pose.t - gt.t).norm());
    prev_gt = gt;
    prev_est = f.pose;
  }
  CHECK(lost == 0);
  std::nth_element(rel_errors.begin(), rel_errors.begin() + rel_errors.size() / 2,
                   rel_errors.end());
  CHECK(rel_errors[rel_errors.size() / 2] < 0.006);
  CHECK(max_abs < 0.03);
}

TEST_CASE("tracker: async reference preparation matches tracking") {
  const CameraIntrinsics K{500.0, 500.0, 320.0, 240.0, 640, 480};
  TrackerConfig cfg = test_config(FieldKind::ANNF);
  cfg.K = K;
  cfg.async_reference = true;
  cfg.keyframe_disparity = 1.0;  // force frequent switches
  Tracker tracker(cfg);
  const auto quads = make_shaded_box_scene();
  int lost = 0;
  double max_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const RigidTransform gt = camera_at(0.006 * i, 0.0, 0.03 * i);
    GrayImage gray;
    DepthImage depth;
    render_quads(quads, K, gt, &gray, &depth);
    const TrackedFrame f = tracker.process_frame(gray, depth, 0.1 * i);
    if (f.quality.lost) ++lost;
    max_err = std::max(max_err, (f.pose.t - gt.t).norm());
  }
  CHECK(lost == 0);
  CHECK(max_err < 0.03);
  CHECK(tracker.world_points().size() > 0);
}
