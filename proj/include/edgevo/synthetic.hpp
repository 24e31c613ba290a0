#pragma once

#include "edgevo/edge_extraction.hpp"

namespace edgevo {

/// 3D line segment with a fixed "bright side" direction; the rendered image
/// gradient is the projected edge normal, signed toward the projection of
/// `side` so that the sign stays consistent across viewpoints (like the
/// dark-to-bright convention of real gradients).
struct EdgeSegment3D {
  Point3 a, b;
  Eigen::Vector3d side;
};

/// Purely geometric edge scene: segments are rasterized directly into edge
/// maps (sub-pixel sampling snapped to the pixel grid), bypassing image
/// rendering and Canny. Used for controlled registration experiments.
struct EdgeScene {
  std::vector<EdgeSegment3D> segments;

  /// Edge map seen from `cam_to_scene` (camera-to-scene transform) at K.
  EdgeMap2D render_edges(const CameraIntrinsics& K, const RigidTransform& cam_to_scene) const;

  /// Reference model: edge pixels of render_edges back-projected with their
  /// exact depths. K must be the level-0 intrinsics.
  EdgeMap3D make_model(const CameraIntrinsics& K, const RigidTransform& cam_to_scene,
                       size_t max_points = 100000) const;
};

/// Wireframe box with a few face stripes ("texture"), centered at `center`,
/// axis-aligned half extents `half`. Gives >= 2000 edge pixels at VGA from
/// ~2.5 units away.
EdgeScene make_box_scene(const Point3& center = {0, 0, 3.0},
                         const Eigen::Vector3d& half = {0.6, 0.45, 0.5});

/// Circle of `radius` on the plane z = `camera_height` in front of the
/// camera (constant depth): the partially-observed-pattern geometry. Points
/// carry analytic radial gradients.
struct CircleScene {
  double radius = 140.0;
  double camera_height = 218.75;

  /// All in-image circle pixels with unit radial gradients plus, per pixel,
  /// the curve parameter angle (used to cut arcs).
  void rasterize(const CameraIntrinsics& K, EdgeMap2D* edges,
                 std::vector<double>* angles = nullptr) const;

  /// Subset covering [start, start + arc) radians.
  EdgeMap2D arc_edges(const CameraIntrinsics& K, double start, double arc) const;

  /// True whether the whole arc projects inside the image.
  bool arc_fully_visible(const CameraIntrinsics& K, double start, double arc) const;

  EdgeMap3D make_model(const CameraIntrinsics& K) const;
};

/// Textured rectangular face used by the image renderer.
struct ShadedQuad {
  Point3 origin;              // corner
  Eigen::Vector3d ex, ey;     // edge vectors spanning the face
  float intensity = 128.0f;   // flat shading
};

/// Tiny z-buffer renderer: ray-casts every pixel against a set of flat-shaded
/// quads and returns the intensity image plus exact depth. Slow but exact;
/// meant for synthetic tracker sequences.
void render_quads(const std::vector<ShadedQuad>& quads, const CameraIntrinsics& K,
                  const RigidTransform& cam_to_scene, GrayImage* gray, DepthImage* depth,
                  float background_intensity = 40.0f);

/// Box in front of a backdrop wall, faces shaded distinctly: a full
/// RGB-D-style synthetic scene for end-to-end tracking tests.
std::vector<ShadedQuad> make_shaded_box_scene();

}  // namespace edgevo
