#pragma once

#include <future>
#include <memory>

#include "edgevo/dataset_io.hpp"
#include "edgevo/registration.hpp"

namespace edgevo {

struct TrackerConfig {
  CameraIntrinsics K;
  SolverConfig solver;
  WeightFunction weight = WeightFunction::standard();
  CannyOptions canny;
  double keyframe_disparity = 3.0;   // median reprojected disparity threshold [px]
  double min_valid_fraction = 0.5;   // reference switch floor
  double motion_decay = 0.9;         // velocity model decay
  size_t max_model_points = 6500;
  // Reference preparation runs on a worker and is published atomically; the
  // sequential mode rebuilds in-line for deterministic tests.
  bool async_reference = false;
  bool enable_reference_switching = true;
};

struct TrackQuality {
  double median_disparity = 0.0;
  double valid_fraction = 0.0;
  int iterations = 0;
  double weighted_rms = 0.0;
  bool lost = false;
};

/// Immutable keyframe: world pose, per-level 3D edge maps, and the level-0
/// edges plus field used to cull the points of the next reference.
struct ReferenceFrame {
  RigidTransform world_pose;
  double timestamp = 0.0;
  CameraIntrinsics K;
  EdgeMap2D edges;
  FieldVariant cull_field;
  std::vector<EdgeMap3D> model_pyramid;  // level 0..levels-1
};

struct MotionModel {
  double alpha = 0.9;
  std::optional<Pose> last_relative;  // previous-to-current camera transform
};

struct TrackedFrame {
  double timestamp = 0.0;
  RigidTransform pose;  // camera-to-world
  TrackQuality quality;
};

struct TrackerState {
  std::shared_ptr<const ReferenceFrame> reference;
  RigidTransform last_pose;
  MotionModel motion;
  std::vector<TrackedFrame> trajectory;
};

/// Decaying velocity prediction: the last pose composed with the last
/// relative motion scaled by alpha (translation linearly, rotation through
/// the scaled Cayley increment). Identity motion without history.
RigidTransform predict_pose(const TrackerState& state);

Pose scale_motion(const Pose& motion, double alpha);

bool should_switch_reference(const TrackerConfig& cfg, const TrackQuality& quality);

/// Median-residual point culling: the new reference's points are reprojected
/// into the nearest reference and only the ceil(N/2) with the smallest
/// geometric residuals survive (ties by point order; unprojectable points
/// rank last).
EdgeMap3D cull_points(const EdgeMap3D& new_model, const ReferenceFrame& nearest_ref,
                      const Pose& relative_pose);

/// Builds a reference frame: Canny edges, foreground depths, 3D edge map
/// capped at max_model_points, culling against nearest_ref (when given), and
/// the per-level model pyramid. Throws ReferenceCreationError when no usable
/// model remains.
std::shared_ptr<const ReferenceFrame> create_reference_frame(
    const GrayImage& gray, const DepthImage& depth, const RigidTransform& world_pose,
    double timestamp, const TrackerConfig& cfg, const ReferenceFrame* nearest_ref = nullptr,
    const Pose& relative_pose = Pose::identity());

/// Per-level edge maps and fields of the current frame (tracking thread uses
/// only the intensity image).
std::vector<FieldVariant> build_field_pyramid(const GrayImage& gray, const TrackerConfig& cfg,
                                              std::vector<EdgeMap2D>* edge_maps = nullptr);

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);
  ~Tracker();

  /// Tracks one frame. The first usable frame bootstraps the reference at the
  /// identity world pose. Registration failures return a lost frame whose
  /// pose is held at the motion prediction.
  TrackedFrame process_frame(const GrayImage& gray, const DepthImage& depth, double timestamp);

  const TrackerState& state() const { return state_; }
  const std::vector<TrackedFrame>& trajectory() const { return state_.trajectory; }
  Trajectory trajectory_poses() const;

  /// Edge points of every reference frame created so far, in world
  /// coordinates (the raw semi-dense map).
  std::vector<Point3> world_points() const;

 private:
  void adopt_pending_reference();
  void request_reference(const GrayImage& gray, const DepthImage& depth,
                         const RigidTransform& world_pose, double timestamp,
                         const Pose& relative_pose);
  void register_keyframe(const std::shared_ptr<const ReferenceFrame>& ref);

  TrackerConfig cfg_;
  std::vector<CameraIntrinsics> K_pyramid_;
  TrackerState state_;
  std::future<std::shared_ptr<const ReferenceFrame>> pending_;
  std::vector<std::pair<RigidTransform, std::vector<Point3>>> keyframe_points_;
};

}  // namespace edgevo
