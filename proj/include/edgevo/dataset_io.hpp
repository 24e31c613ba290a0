#pragma once

#include <optional>
#include <string>

#include "edgevo/camera.hpp"
#include "edgevo/core.hpp"

namespace edgevo {

/// One associated RGB-D frame of a TUM-format sequence. Images are loaded
/// lazily through the stored paths.
struct SequenceFrame {
  double timestamp = 0.0;  // rgb timestamp, seconds
  std::string rgb_path;
  std::string depth_path;
  std::optional<RigidTransform> ground_truth;  // camera-to-world
};

struct Sequence {
  std::vector<SequenceFrame> frames;
  double depth_scale = 5000.0;
};

struct TrajectoryEntry {
  double timestamp = 0.0;
  RigidTransform pose;  // camera-to-world
};
using Trajectory = std::vector<TrajectoryEntry>;

/// Reads rgb.txt / depth.txt (and groundtruth.txt when present) and
/// associates entries by nearest timestamp, greedily over ascending |dt| with
/// each file used at most once; pairs farther apart than max_dt are dropped.
Sequence load_tum_sequence(const std::string& dir, double max_dt = 0.02,
                           double depth_scale = 5000.0);

/// TUM trajectory format: `timestamp tx ty tz qx qy qz qw` per line,
/// timestamp with 6 decimals, unit quaternion.
void write_trajectory_tum(const Trajectory& trajectory, const std::string& path);
Trajectory load_trajectory_tum(const std::string& path);

/// ASCII PLY of 3D points (world frame).
void export_pointcloud_ply(const std::vector<Point3>& points, const std::string& path);

/// Plain-text key=value intrinsics file: fx, fy, cx, cy, width, height,
/// depth_scale. Missing depth_scale falls back to 5000.
struct IntrinsicsConfig {
  CameraIntrinsics K;
  double depth_scale = 5000.0;
};
IntrinsicsConfig load_intrinsics(const std::string& path);

/// Kinect v1 defaults used by the TUM sequences.
IntrinsicsConfig default_tum_intrinsics();

/// Greedy nearest-timestamp association used for rgb/depth, ground truth and
/// trajectory evaluation: candidate pairs sorted by |dt|, each side matched
/// at most once. Returns index pairs (into a, into b).
std::vector<std::pair<size_t, size_t>> associate_timestamps(const std::vector<double>& a,
                                                            const std::vector<double>& b,
                                                            double max_dt);

}  // namespace edgevo
