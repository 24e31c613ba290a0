#include "edgevo/synthetic.hpp"

#include <limits>
#include <map>

namespace edgevo {

namespace {

struct PixelSample {
  Eigen::Vector2d grad;
  double depth;
  double angle;  // circle parameter, unused for segments
};

// Deduplicates snapped pixels, keeping the first sample per pixel.
class PixelAccumulator {
 public:
  PixelAccumulator(int w, int h) : w_(w), h_(h) {}

  void add(const Pixel& px, const Eigen::Vector2d& grad, double depth, double angle = 0.0) {
    const int c = static_cast<int>(std::llround(px.x()));
    const int r = static_cast<int>(std::llround(px.y()));
    if (r < 0 || r >= h_ || c < 0 || c >= w_) return;
    samples_.try_emplace(static_cast<int64_t>(r) * w_ + c, PixelSample{grad, depth, angle});
  }

  EdgeMap2D edges(std::vector<double>* depths = nullptr,
                  std::vector<double>* angles = nullptr) const {
    EdgeMap2D out;
    out.width = w_;
    out.height = h_;
    for (const auto& [key, s] : samples_) {
      out.pixels.push_back({static_cast<int>(key % w_), static_cast<int>(key / w_)});
      out.grad_dir.push_back(s.grad);
      out.bin.push_back(static_cast<uint8_t>(orientation_bin(s.grad)));
      if (depths) depths->push_back(s.depth);
      if (angles) angles->push_back(s.angle);
    }
    return out;
  }

 private:
  int w_, h_;
  std::map<int64_t, PixelSample> samples_;
};

EdgeMap3D model_from_edges(const EdgeMap2D& edges, const std::vector<double>& depths,
                           const CameraIntrinsics& K, size_t max_points) {
  EdgeMap3D model;
  const auto idx = uniform_subsample_indices(edges.size(), max_points);
  for (size_t i : idx) {
    const Pixel px(edges.pixels[i].x(), edges.pixels[i].y());
    model.points.push_back(backproject(K, px, depths[i]));
    model.source_pixel.push_back(px);
    model.grad_dir.push_back(edges.grad_dir[i]);
    model.depth.push_back(depths[i]);
  }
  return model;
}

// Rasterizes all segments into the accumulator: dense 3D sampling, projected
// tangent-normal gradients signed toward the projected bright side.
void rasterize_segments(const EdgeScene& scene, const CameraIntrinsics& K,
                        const RigidTransform& cam_to_scene, PixelAccumulator& acc) {
  const RigidTransform scene_to_cam = cam_to_scene.inverse();
  for (const auto& seg : scene.segments) {
    const Point3 a = scene_to_cam.apply(seg.a);
    const Point3 b = scene_to_cam.apply(seg.b);
    const double zmin = std::min(a.z(), b.z());
    if (!(zmin > 1e-6)) continue;
    // Enough samples for 8-connected coverage of the projected segment.
    const double px_len = ((b - a).head<2>().norm() + std::fabs(b.z() - a.z())) *
                          std::max(K.fx, K.fy) / zmin;
    const int n = std::max(2, static_cast<int>(px_len * 3.0));
    const Eigen::Vector3d side_cam = scene_to_cam.R * seg.side;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const Point3 p = a + t * (b - a);
      const double t2 = i < n ? t + 0.5 / n : t - 0.5 / n;
      const Point3 q = a + t2 * (b - a);
      if (!(p.z() > 1e-6) || !(q.z() > 1e-6)) continue;
      const Pixel op = project(K, p);
      Eigen::Vector2d tangent = (project(K, q) - op) * (i < n ? 1.0 : -1.0);
      if (tangent.norm() < 1e-12) continue;
      tangent.normalize();
      Eigen::Vector2d normal(-tangent.y(), tangent.x());
      const Point3 ph = p + 0.01 * p.z() * side_cam;
      if (ph.z() > 1e-6) {
        const Eigen::Vector2d toward = project(K, ph) - op;
        if (normal.dot(toward) < 0) normal = -normal;
      }
      acc.add(op, normal, p.z());
    }
  }
}

}  // namespace

EdgeMap2D EdgeScene::render_edges(const CameraIntrinsics& K,
                                  const RigidTransform& cam_to_scene) const {
  PixelAccumulator acc(K.width, K.height);
  rasterize_segments(*this, K, cam_to_scene, acc);
  return acc.edges();
}

EdgeMap3D EdgeScene::make_model(const CameraIntrinsics& K, const RigidTransform& cam_to_scene,
                                size_t max_points) const {
  PixelAccumulator acc(K.width, K.height);
  rasterize_segments(*this, K, cam_to_scene, acc);
  std::vector<double> depths;
  const EdgeMap2D edges = acc.edges(&depths);
  return model_from_edges(edges, depths, K, max_points);
}

EdgeScene make_box_scene(const Point3& center, const Eigen::Vector3d& half) {
  EdgeScene scene;
  const double x0 = center.x() - half.x(), x1 = center.x() + half.x();
  const double y0 = center.y() - half.y(), y1 = center.y() + half.y();
  const double z0 = center.z() - half.z(), z1 = center.z() + half.z();

  auto add = [&](const Point3& a, const Point3& b, const Eigen::Vector3d& side) {
    scene.segments.push_back({a, b, side.normalized()});
  };

  const Eigen::Vector3d up(0, -1, 0), down(0, 1, 0), left(-1, 0, 0), right(1, 0, 0),
      front(0, 0, -1);

  // Front face outline.
  add({x0, y0, z0}, {x1, y0, z0}, up);
  add({x1, y0, z0}, {x1, y1, z0}, right);
  add({x1, y1, z0}, {x0, y1, z0}, down);
  add({x0, y1, z0}, {x0, y0, z0}, left);
  // Back face outline.
  add({x0, y0, z1}, {x1, y0, z1}, up);
  add({x1, y0, z1}, {x1, y1, z1}, right);
  add({x1, y1, z1}, {x0, y1, z1}, down);
  add({x0, y1, z1}, {x0, y0, z1}, left);
  // Connecting edges.
  add({x0, y0, z0}, {x0, y0, z1}, up);
  add({x1, y0, z0}, {x1, y0, z1}, up);
  add({x0, y1, z0}, {x0, y1, z1}, down);
  add({x1, y1, z0}, {x1, y1, z1}, down);

  // Face stripes for orientation diversity; a single vertical keeps the
  // structure aperiodic (no aliasing between nearby parallel edges).
  add({x0 + 0.3 * (x1 - x0), y0, z0}, {x0 + 0.3 * (x1 - x0), y1, z0}, front);
  add({x0, y0 + 0.4 * (y1 - y0), z0}, {x1, y0 + 0.4 * (y1 - y0), z0}, front);
  add({x0, y0 + 0.75 * (y1 - y0), z0}, {x1, y0 + 0.75 * (y1 - y0), z0}, front);
  add({x0, y0, z0}, {x1, y1, z0}, front);
  add({x0, y0 + 0.5 * (y1 - y0), z0}, {x0 + 0.5 * (x1 - x0), y1, z0}, front);

  return scene;
}

void CircleScene::rasterize(const CameraIntrinsics& K, EdgeMap2D* edges,
                            std::vector<double>* angles) const {
  PixelAccumulator acc(K.width, K.height);
  const double px_radius = radius * std::max(K.fx, K.fy) / camera_height;
  const int n = std::max(16, static_cast<int>(2.0 * M_PI * px_radius * 3.0));
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * M_PI * i / n;
    // Ground-plane circle at constant camera depth; the image gradient is the
    // analytic outward radial direction.
    const Point3 p(radius * std::cos(t), radius * std::sin(t), camera_height);
    const Pixel op = project(K, p);
    const Eigen::Vector2d g(std::cos(t), std::sin(t));
    acc.add(op, g, camera_height, t);
  }
  std::vector<double> ang;
  *edges = acc.edges(nullptr, &ang);
  if (angles) *angles = std::move(ang);
}

EdgeMap2D CircleScene::arc_edges(const CameraIntrinsics& K, double start, double arc) const {
  EdgeMap2D all;
  std::vector<double> angles;
  rasterize(K, &all, &angles);
  auto in_arc = [&](double t) {
    double d = std::fmod(t - start, 2.0 * M_PI);
    if (d < 0) d += 2.0 * M_PI;
    return d <= arc;
  };
  EdgeMap2D out;
  out.width = all.width;
  out.height = all.height;
  for (size_t i = 0; i < all.size(); ++i) {
    if (!in_arc(angles[i])) continue;
    out.pixels.push_back(all.pixels[i]);
    out.grad_dir.push_back(all.grad_dir[i]);
    out.bin.push_back(all.bin[i]);
  }
  return out;
}

bool CircleScene::arc_fully_visible(const CameraIntrinsics& K, double start, double arc) const {
  const double px_radius = radius * std::max(K.fx, K.fy) / camera_height;
  const int n = std::max(8, static_cast<int>(arc * px_radius));
  for (int i = 0; i <= n; ++i) {
    const double t = start + arc * i / n;
    const Point3 p(radius * std::cos(t), radius * std::sin(t), camera_height);
    const Pixel o = project(K, p);
    if (o.x() < 0.5 || o.x() > K.width - 1.5 || o.y() < 0.5 || o.y() > K.height - 1.5)
      return false;
  }
  return true;
}

EdgeMap3D CircleScene::make_model(const CameraIntrinsics& K) const {
  EdgeMap2D edges;
  rasterize(K, &edges);
  std::vector<double> depths(edges.size(), camera_height);
  return model_from_edges(edges, depths, K, edges.size());
}

void render_quads(const std::vector<ShadedQuad>& quads, const CameraIntrinsics& K,
                  const RigidTransform& cam_to_scene, GrayImage* gray, DepthImage* depth,
                  float background_intensity) {
  *gray = GrayImage(K.width, K.height, background_intensity);
  *depth = DepthImage(K.width, K.height, 0.0f);

  struct CamQuad {
    Point3 origin;
    Eigen::Vector3d ex, ey, n;
    double ex2, ey2;
    float intensity;
  };
  std::vector<CamQuad> cq;
  const RigidTransform scene_to_cam = cam_to_scene.inverse();
  for (const auto& q : quads) {
    CamQuad c;
    c.origin = scene_to_cam.apply(q.origin);
    c.ex = scene_to_cam.R * q.ex;
    c.ey = scene_to_cam.R * q.ey;
    c.n = c.ex.cross(c.ey);
    c.ex2 = c.ex.squaredNorm();
    c.ey2 = c.ey.squaredNorm();
    c.intensity = q.intensity;
    cq.push_back(c);
  }

  auto cast = [&](double u, double v, float* intensity) {
    const Eigen::Vector3d ray((u - K.cx) / K.fx, (v - K.cy) / K.fy, 1.0);
    double best_z = std::numeric_limits<double>::infinity();
    float best_i = background_intensity;
    for (const auto& q : cq) {
      const double denom = ray.dot(q.n);
      if (std::fabs(denom) < 1e-12) continue;
      const double s = q.origin.dot(q.n) / denom;  // ray parameter = camera z
      if (!(s > 1e-6) || s >= best_z) continue;
      const Eigen::Vector3d hit = s * ray - q.origin;
      const double qu = hit.dot(q.ex) / q.ex2;
      const double qv = hit.dot(q.ey) / q.ey2;
      if (qu < 0.0 || qu > 1.0 || qv < 0.0 || qv > 1.0) continue;
      best_z = s;
      best_i = q.intensity;
    }
    if (intensity) *intensity = best_i;
    return std::isfinite(best_z) ? best_z : 0.0;
  };

  GrayImage& g = *gray;
  DepthImage& d = *depth;
  parallel_for(0, K.height, [&](int r) {
    for (int c = 0; c < K.width; ++c) {
      // 3x3 supersampled shading keeps the sub-pixel edge phase; depth stays
      // the exact center-ray value.
      float acc = 0.0f;
      for (int sr = -1; sr <= 1; ++sr)
        for (int sc = -1; sc <= 1; ++sc) {
          float i;
          cast(c + sc / 3.0, r + sr / 3.0, &i);
          acc += i;
        }
      g.at(r, c) = acc / 9.0f;
      d.at(r, c) = static_cast<float>(cast(c, r, nullptr));
    }
  });
}

namespace {

void add_box(std::vector<ShadedQuad>& quads, const Point3& c, const Eigen::Vector3d& h,
             float base_intensity) {
  const double x0 = c.x() - h.x(), x1 = c.x() + h.x();
  const double y0 = c.y() - h.y(), y1 = c.y() + h.y();
  const double z0 = c.z() - h.z(), z1 = c.z() + h.z();
  // Front, top, left, right faces shaded distinctly.
  quads.push_back({{x0, y0, z0}, {x1 - x0, 0, 0}, {0, y1 - y0, 0}, base_intensity});
  quads.push_back({{x0, y0, z0}, {x1 - x0, 0, 0}, {0, 0, z1 - z0}, base_intensity - 40.0f});
  quads.push_back({{x0, y0, z0}, {0, y1 - y0, 0}, {0, 0, z1 - z0}, base_intensity + 40.0f});
  quads.push_back({{x1, y0, z0}, {0, y1 - y0, 0}, {0, 0, z1 - z0}, base_intensity - 70.0f});
  // Stripe on the front face.
  quads.push_back({{x0 + 0.35 * (x1 - x0), y0, z0 - 0.001}, {0.15 * (x1 - x0), 0, 0},
                   {0, y1 - y0, 0}, base_intensity - 95.0f});
}

}  // namespace

// Objects at several depths: vertical edges with depth spread are what make
// yaw observable against lateral translation.
std::vector<ShadedQuad> make_shaded_box_scene() {
  std::vector<ShadedQuad> quads;
  // Backdrop wall and a floor strip.
  quads.push_back({{-6, -5, 6.0}, {12, 0, 0}, {0, 10, 0}, 70.0f});
  quads.push_back({{-6, 1.4, 3.0}, {12, 0, 0}, {0, 0, 6}, 110.0f});

  add_box(quads, {0.1, 0.05, 2.8}, {0.55, 0.4, 0.45}, 190.0f);
  add_box(quads, {-1.3, -0.2, 4.6}, {0.45, 0.5, 0.3}, 170.0f);
  add_box(quads, {1.5, 0.3, 4.2}, {0.3, 0.6, 0.25}, 205.0f);
  // Near-field slab: the close vertical edges carry the parallax that
  // separates yaw from lateral translation.
  add_box(quads, {-0.55, 0.45, 1.7}, {0.18, 0.22, 0.15}, 215.0f);
  // A thin post near the wall.
  quads.push_back({{-0.3, -1.6, 5.5}, {0.18, 0, 0}, {0, 3.0, 0}, 150.0f});

  // Diagonal strips on the wall and the front face: edges of many phases and
  // inclinations decorrelate the pixel quantization of the long box edges.
  auto strip = [&](const Point3& center, double angle_deg, double len, double wdt, double z,
                   float intensity) {
    const double a = angle_deg * M_PI / 180.0;
    const Eigen::Vector3d dir(std::cos(a), std::sin(a), 0.0);
    const Eigen::Vector3d perp(-std::sin(a), std::cos(a), 0.0);
    ShadedQuad q;
    q.origin = center - 0.5 * len * dir - 0.5 * wdt * perp + Point3(0, 0, z - center.z());
    q.ex = len * dir;
    q.ey = wdt * perp;
    q.intensity = intensity;
    quads.push_back(q);
  };
  strip({-2.2, -1.2, 0}, 30.0, 1.6, 0.22, 5.995, 130.0f);
  strip({2.4, -0.9, 0}, 120.0, 1.8, 0.25, 5.995, 115.0f);
  strip({2.0, 1.6, 0}, 60.0, 1.4, 0.2, 5.995, 160.0f);
  strip({-2.4, 1.3, 0}, 150.0, 1.5, 0.2, 5.995, 35.0f);
  strip({0.9, -1.8, 0}, 75.0, 1.2, 0.18, 5.995, 180.0f);
  strip({0.05, 0.0, 0}, 40.0, 0.8, 0.12, 2.349, 60.0f);
  strip({0.35, -0.15, 0}, 115.0, 0.7, 0.1, 2.349, 250.0f);
  return quads;
}

}  // namespace edgevo
