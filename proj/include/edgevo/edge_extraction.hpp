#pragma once

#include <optional>

#include "edgevo/camera.hpp"
#include "edgevo/core.hpp"

namespace edgevo {

struct GradientMap {
  Image<float> gx, gy;    // intensity units per pixel
  Image<float> norm;      // sqrt(gx^2 + gy^2); zero in the 2-pixel border
};

/// Canny edge pixels with per-pixel unit gradient direction and orientation
/// bin (8 bins of 45 degrees, bin centers at multiples of 45 degrees).
struct EdgeMap2D {
  int width = 0, height = 0;
  std::vector<Eigen::Vector2i> pixels;       // (u, v) integer coordinates
  std::vector<Eigen::Vector2d> grad_dir;     // unit vectors
  std::vector<uint8_t> bin;                  // 0..7

  size_t size() const { return pixels.size(); }
  bool empty() const { return pixels.empty(); }
};

/// Back-projected reference edge pixels: the model side of the registration.
struct EdgeMap3D {
  std::vector<Point3> points;                // reference camera frame
  std::vector<Pixel> source_pixel;           // originating pixel (level-0 grid)
  std::vector<Eigen::Vector2d> grad_dir;     // unit model gradients
  std::vector<double> depth;                 // camera-frame z, > 0

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct CannyOptions {
  // Thresholds on the gradient norm. <= 0 means automatic: high at the given
  // percentile of nonzero norms, low = low_ratio * high.
  double high = 0.0;
  double low = 0.0;
  double high_percentile = 0.92;
  double low_ratio = 0.4;
};

/// 5x5 Gaussian smoothing (sigma 1) followed by separable 5x5 Sobel kernels.
/// The 2-pixel border gets zero gradient.
GradientMap compute_gradients(const GrayImage& gray);

/// Non-maximum suppression along the gradient direction plus hysteresis:
/// surviving pixels have norm >= low and are 8-connected (through surviving
/// pixels) to one with norm >= high.
EdgeMap2D canny_edges(const GradientMap& grad, double high, double low);
EdgeMap2D canny_edges(const GradientMap& grad, const CannyOptions& opts = {});

/// Bin k covers inclinations [45k - 22.5, 45k + 22.5) degrees, mod 360.
int orientation_bin(const Eigen::Vector2d& grad_dir);

/// Unit vector at the center of bin k.
Eigen::Vector2d orientation_bin_center(int bin);

/// Foreground-aware depth lookup: depths in the (clipped) 5x5 patch around px
/// are sorted and gap-clustered; returns the center of the closest cluster
/// with at least `min_cluster` members, or nullopt when no such cluster
/// exists. Keeps edge points on the foreground side of depth discontinuities.
std::optional<double> foreground_depth(const DepthImage& depth, const Eigen::Vector2i& px,
                                       int min_cluster = 3);

/// One 3D point per edge pixel with a valid foreground depth, uniformly
/// subsampled (deterministic stride) to at most max_points.
EdgeMap3D build_edge_map_3d(const EdgeMap2D& edges, const DepthImage& depth,
                            const CameraIntrinsics& K, size_t max_points = 6500);

/// Deterministic uniform-stride index subsample: picks exactly m of n.
std::vector<size_t> uniform_subsample_indices(size_t n, size_t m);

/// Luminance conversion helper for interleaved 8-bit RGB buffers.
GrayImage rgb_to_gray(const uint8_t* rgb, int width, int height);

/// 2x downsampled pyramid (2x2 box filter), levels 0..levels-1.
std::vector<GrayImage> build_image_pyramid(const GrayImage& gray, int levels);

}  // namespace edgevo
