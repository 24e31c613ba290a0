#include "edgevo/edge_extraction.hpp"

#include <numeric>

namespace edgevo {

namespace {

// Separable 5x5 kernels. Smoothing taps sum to 16, derivative taps respond
// with 8 per unit slope, so gradients are normalized by 1/128 to keep them in
// intensity units per pixel.
constexpr float kSmooth[5] = {1, 4, 6, 4, 1};
constexpr float kDeriv[5] = {-1, -2, 0, 2, 1};
constexpr float kGauss[5] = {1, 4, 6, 4, 1};  // sigma ~1, normalized by 16

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

GrayImage gaussian_smooth_5(const GrayImage& in) {
  const int w = in.width(), h = in.height();
  GrayImage tmp(w, h), out(w, h);
  parallel_for(0, h, [&](int r) {
    for (int c = 0; c < w; ++c) {
      float acc = 0;
      for (int k = -2; k <= 2; ++k) acc += kGauss[k + 2] * in.at(r, clampi(c + k, 0, w - 1));
      tmp.at(r, c) = acc / 16.0f;
    }
  });
  parallel_for(0, h, [&](int r) {
    for (int c = 0; c < w; ++c) {
      float acc = 0;
      for (int k = -2; k <= 2; ++k) acc += kGauss[k + 2] * tmp.at(clampi(r + k, 0, h - 1), c);
      out.at(r, c) = acc / 16.0f;
    }
  });
  return out;
}

}  // namespace

GradientMap compute_gradients(const GrayImage& gray) {
  const int w = gray.width(), h = gray.height();
  if (w < 5 || h < 5) throw InvalidInput("compute_gradients: image smaller than 5x5");

  const GrayImage smoothed = gaussian_smooth_5(gray);

  // Horizontal passes: derivative for gx, smoothing for gy.
  GrayImage dx(w, h), sx(w, h);
  parallel_for(0, h, [&](int r) {
    for (int c = 2; c < w - 2; ++c) {
      float d = 0, s = 0;
      for (int k = -2; k <= 2; ++k) {
        const float v = smoothed.at(r, c + k);
        d += kDeriv[k + 2] * v;
        s += kSmooth[k + 2] * v;
      }
      dx.at(r, c) = d;
      sx.at(r, c) = s;
    }
  });

  GradientMap out;
  out.gx = GrayImage(w, h, 0.0f);
  out.gy = GrayImage(w, h, 0.0f);
  out.norm = GrayImage(w, h, 0.0f);
  parallel_for(2, h - 2, [&](int r) {
    for (int c = 2; c < w - 2; ++c) {
      float gx = 0, gy = 0;
      for (int k = -2; k <= 2; ++k) {
        gx += kSmooth[k + 2] * dx.at(r + k, c);
        gy += kDeriv[k + 2] * sx.at(r + k, c);
      }
      gx /= 128.0f;
      gy /= 128.0f;
      out.gx.at(r, c) = gx;
      out.gy.at(r, c) = gy;
      out.norm.at(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  });
  return out;
}

int orientation_bin(const Eigen::Vector2d& grad_dir) {
  if (grad_dir.squaredNorm() < 1e-24)
    throw InvalidInput("orientation_bin: zero gradient direction");
  double deg = std::atan2(grad_dir.y(), grad_dir.x()) * 180.0 / M_PI;
  if (deg < 0) deg += 360.0;
  int bin = static_cast<int>(std::floor((deg + 22.5) / 45.0)) % 8;
  return bin;
}

Eigen::Vector2d orientation_bin_center(int bin) {
  const double a = bin * 45.0 * M_PI / 180.0;
  return {std::cos(a), std::sin(a)};
}

EdgeMap2D canny_edges(const GradientMap& grad, double high, double low) {
  if (!(low > 0.0) || low > high) throw InvalidInput("canny_edges: need 0 < low <= high");
  const int w = grad.norm.width(), h = grad.norm.height();

  // NMS: a pixel survives when its norm is >= both neighbours along the
  // (quantized) gradient direction, strictly greater on the negative side so
  // plateaus keep a single pixel.
  Image<uint8_t> nms(w, h, 0);
  parallel_for(1, h - 1, [&](int r) {
    for (int c = 1; c < w - 1; ++c) {
      const float n = grad.norm.at(r, c);
      if (n < low) continue;
      const float gx = grad.gx.at(r, c), gy = grad.gy.at(r, c);
      const float ax = std::fabs(gx), ay = std::fabs(gy);
      int dr, dc;
      // Quantize the direction into 4 sectors (tan 22.5 = 0.41421).
      if (ax > ay * 2.41421356f) {
        dr = 0; dc = 1;
      } else if (ay > ax * 2.41421356f) {
        dr = 1; dc = 0;
      } else if ((gx > 0) == (gy > 0)) {
        dr = 1; dc = 1;
      } else {
        dr = 1; dc = -1;
      }
      const float n_neg = grad.norm.at(r - dr, c - dc);
      const float n_pos = grad.norm.at(r + dr, c + dc);
      if (n > n_neg && n >= n_pos) nms.at(r, c) = (n >= high) ? 2 : 1;
    }
  });

  // Hysteresis: keep weak pixels 8-connected to a strong one.
  Image<uint8_t> keep(w, h, 0);
  std::vector<Eigen::Vector2i> stack;
  for (int r = 1; r < h - 1; ++r)
    for (int c = 1; c < w - 1; ++c)
      if (nms.at(r, c) == 2 && !keep.at(r, c)) {
        keep.at(r, c) = 1;
        stack.push_back({c, r});
        while (!stack.empty()) {
          const Eigen::Vector2i p = stack.back();
          stack.pop_back();
          for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
              const int rr = p.y() + dr, cc = p.x() + dc;
              if (rr < 1 || rr >= h - 1 || cc < 1 || cc >= w - 1) continue;
              if (nms.at(rr, cc) && !keep.at(rr, cc)) {
                keep.at(rr, cc) = 1;
                stack.push_back({cc, rr});
              }
            }
        }
      }

  EdgeMap2D out;
  out.width = w;
  out.height = h;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (keep.at(r, c)) {
        const double gx = grad.gx.at(r, c), gy = grad.gy.at(r, c);
        const double n = std::sqrt(gx * gx + gy * gy);
        const Eigen::Vector2d dir(gx / n, gy / n);
        out.pixels.push_back({c, r});
        out.grad_dir.push_back(dir);
        out.bin.push_back(static_cast<uint8_t>(orientation_bin(dir)));
      }
  return out;
}

EdgeMap2D canny_edges(const GradientMap& grad, const CannyOptions& opts) {
  double high = opts.high, low = opts.low;
  if (!(high > 0.0)) {
    std::vector<float> nz;
    nz.reserve(grad.norm.size());
    for (float v : grad.norm.data())
      if (v > 0.0f) nz.push_back(v);
    if (nz.empty()) {
      EdgeMap2D empty;
      empty.width = grad.norm.width();
      empty.height = grad.norm.height();
      return empty;
    }
    size_t k = static_cast<size_t>(opts.high_percentile * (nz.size() - 1));
    std::nth_element(nz.begin(), nz.begin() + k, nz.end());
    high = nz[k];
    if (!(high > 0.0)) {
      EdgeMap2D empty;
      empty.width = grad.norm.width();
      empty.height = grad.norm.height();
      return empty;
    }
  }
  if (!(low > 0.0)) low = opts.low_ratio * high;
  return canny_edges(grad, high, low);
}

std::optional<double> foreground_depth(const DepthImage& depth, const Eigen::Vector2i& px,
                                       int min_cluster) {
  const int w = depth.width(), h = depth.height();
  const int r0 = clampi(px.y() - 2, 0, h - 1), r1 = clampi(px.y() + 2, 0, h - 1);
  const int c0 = clampi(px.x() - 2, 0, w - 1), c1 = clampi(px.x() + 2, 0, w - 1);

  std::vector<double> vals;
  vals.reserve(25);
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      const float z = depth.at(r, c);
      if (depth_valid(z)) vals.push_back(z);
    }
  if (vals.empty()) return std::nullopt;
  std::sort(vals.begin(), vals.end());

  // 1-D gap clustering under a quadratic depth-noise model: a new cluster
  // starts where the gap between consecutive sorted depths exceeds 3 sigma.
  double best_center = 0.0;
  bool found = false;
  size_t start = 0;
  for (size_t i = 1; i <= vals.size(); ++i) {
    const bool split =
        i == vals.size() ||
        (vals[i] - vals[i - 1]) > 3.0 * std::max(0.01, 0.0025 * vals[i - 1] * vals[i - 1]);
    if (!split) continue;
    const size_t n = i - start;
    if (n >= static_cast<size_t>(min_cluster)) {
      const double center =
          std::accumulate(vals.begin() + start, vals.begin() + i, 0.0) / static_cast<double>(n);
      if (!found) {  // clusters are visited in ascending depth order
        best_center = center;
        found = true;
      }
    }
    start = i;
  }
  if (!found) return std::nullopt;
  return best_center;
}

std::vector<size_t> uniform_subsample_indices(size_t n, size_t m) {
  std::vector<size_t> idx;
  if (m >= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    return idx;
  }
  idx.reserve(m);
  for (size_t i = 0; i < m; ++i) idx.push_back(i * n / m);
  return idx;
}

EdgeMap3D build_edge_map_3d(const EdgeMap2D& edges, const DepthImage& depth,
                            const CameraIntrinsics& K, size_t max_points) {
  if (edges.width != depth.width() || edges.height != depth.height())
    throw InvalidInput("build_edge_map_3d: edge map / depth size mismatch");

  EdgeMap3D full;
  for (size_t i = 0; i < edges.size(); ++i) {
    const auto z = foreground_depth(depth, edges.pixels[i]);
    if (!z) continue;
    const Pixel px(edges.pixels[i].x(), edges.pixels[i].y());
    full.points.push_back(backproject(K, px, *z));
    full.source_pixel.push_back(px);
    full.grad_dir.push_back(edges.grad_dir[i]);
    full.depth.push_back(*z);
  }
  if (full.size() <= max_points) return full;

  EdgeMap3D out;
  for (size_t i : uniform_subsample_indices(full.size(), max_points)) {
    out.points.push_back(full.points[i]);
    out.source_pixel.push_back(full.source_pixel[i]);
    out.grad_dir.push_back(full.grad_dir[i]);
    out.depth.push_back(full.depth[i]);
  }
  return out;
}

GrayImage rgb_to_gray(const uint8_t* rgb, int width, int height) {
  GrayImage out(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const uint8_t* p = rgb + 3 * (static_cast<size_t>(r) * width + c);
      out.at(r, c) = 0.299f * p[0] + 0.587f * p[1] + 0.114f * p[2];
    }
  return out;
}

std::vector<GrayImage> build_image_pyramid(const GrayImage& gray, int levels) {
  std::vector<GrayImage> pyr;
  pyr.push_back(gray);
  for (int l = 1; l < levels; ++l) {
    const GrayImage& prev = pyr.back();
    const int w = (prev.width() + 1) / 2, h = (prev.height() + 1) / 2;
    GrayImage next(w, h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int r0 = 2 * r, c0 = 2 * c;
        const int r1 = std::min(r0 + 1, prev.height() - 1);
        const int c1 = std::min(c0 + 1, prev.width() - 1);
        next.at(r, c) = 0.25f * (prev.at(r0, c0) + prev.at(r0, c1) + prev.at(r1, c0) +
                                 prev.at(r1, c1));
      }
    pyr.push_back(std::move(next));
  }
  return pyr;
}

}  // namespace edgevo
