#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"

using namespace edgevo;

namespace {

GrayImage constant_image(int w, int h, float v) { return GrayImage(w, h, v); }

GrayImage vertical_step(int w, int h, int step_col, float lo = 20.0f, float hi = 220.0f) {
  GrayImage img(w, h, lo);
  for (int r = 0; r < h; ++r)
    for (int c = step_col; c < w; ++c) img.at(r, c) = hi;
  return img;
}

GrayImage ramp_u(int w, int h) {
  GrayImage img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img.at(r, c) = static_cast<float>(c);
  return img;
}

}  // namespace

TEST_CASE("compute_gradients: constant image has zero norm everywhere") {
  const GradientMap g = compute_gradients(constant_image(32, 24, 123.0f));
  for (float v : g.norm.data()) CHECK(v == 0.0f);
  CHECK_THROWS_AS(compute_gradients(constant_image(4, 8, 0.0f)), InvalidInput);
}

TEST_CASE("compute_gradients: vertical step has gx > 0 and gy = 0 along the step") {
  const GradientMap g = compute_gradients(vertical_step(32, 16, 16));
  for (int r = 4; r < 12; ++r) {
    CHECK(g.gx.at(r, 16) > 0.0f);
    CHECK(std::fabs(g.gy.at(r, 16)) < 1e-4f);
  }
}

TEST_CASE("compute_gradients: linear ramp gives constant unit gx in the interior") {
  const GradientMap g = compute_gradients(ramp_u(24, 16));
  for (int r = 4; r < 12; ++r)
    for (int c = 4; c < 20; ++c) {
      CHECK(g.gx.at(r, c) == doctest::Approx(1.0f).epsilon(1e-4));
      CHECK(std::fabs(g.gy.at(r, c)) < 1e-4f);
      CHECK(g.norm.at(r, c) ==
            doctest::Approx(std::sqrt(g.gx.at(r, c) * g.gx.at(r, c) +
                                      g.gy.at(r, c) * g.gy.at(r, c))));
    }
  // 2-pixel border carries no gradient.
  for (int c = 0; c < 24; ++c) {
    CHECK(g.norm.at(0, c) == 0.0f);
    CHECK(g.norm.at(1, c) == 0.0f);
  }
}

TEST_CASE("canny_edges: constant image yields an empty edge map") {
  const GradientMap g = compute_gradients(constant_image(32, 32, 77.0f));
  const EdgeMap2D edges = canny_edges(g, CannyOptions{});
  CHECK(edges.empty());
  CHECK(edges.width == 32);
}

TEST_CASE("canny_edges: single step edge gives one 1-pixel-wide chain") {
  const GradientMap g = compute_gradients(vertical_step(40, 30, 20));
  const EdgeMap2D edges = canny_edges(g, CannyOptions{});
  CHECK(!edges.empty());
  std::map<int, std::vector<int>> by_row;
  for (const auto& p : edges.pixels) by_row[p.y()].push_back(p.x());
  for (const auto& [row, cols] : by_row) {
    CHECK(cols.size() == 1);
    CHECK(std::fabs(cols[0] - 19.5) <= 1.0);  // the step sits between columns 19 and 20
  }
  CHECK(by_row.size() >= 20);
}

TEST_CASE("canny_edges: NMS survivors dominate both neighbours along the gradient") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> d(0.0f, 255.0f);
  GrayImage img(48, 48);
  for (auto& v : img.data()) v = d(rng);
  const GradientMap g = compute_gradients(img);
  const EdgeMap2D edges = canny_edges(g, CannyOptions{});
  for (size_t i = 0; i < edges.size(); ++i) {
    const int c = edges.pixels[i].x(), r = edges.pixels[i].y();
    const float gx = g.gx.at(r, c), gy = g.gy.at(r, c);
    const float ax = std::fabs(gx), ay = std::fabs(gy);
    int dr, dc;
    if (ax > ay * 2.41421356f) {
      dr = 0; dc = 1;
    } else if (ay > ax * 2.41421356f) {
      dr = 1; dc = 0;
    } else if ((gx > 0) == (gy > 0)) {
      dr = 1; dc = 1;
    } else {
      dr = 1; dc = -1;
    }
    CHECK(g.norm.at(r, c) >= g.norm.at(r - dr, c - dc));
    CHECK(g.norm.at(r, c) >= g.norm.at(r + dr, c + dc));
  }
}

TEST_CASE("canny_edges: two parallel steps give two disjoint chains") {
  GrayImage img(48, 32, 20.0f);
  for (int r = 0; r < 32; ++r)
    for (int c = 16; c < 26; ++c) img.at(r, c) = 220.0f;  // band: edges 10 px apart
  const GradientMap g = compute_gradients(img);
  const EdgeMap2D edges = canny_edges(g, CannyOptions{});
  std::set<int> cols;
  for (const auto& p : edges.pixels) cols.insert(p.x());
  CHECK(cols.size() >= 2);
  std::vector<int> sorted(cols.begin(), cols.end());
  int max_gap = 0;
  for (size_t i = 1; i < sorted.size(); ++i)
    max_gap = std::max(max_gap, sorted[i] - sorted[i - 1]);
  CHECK(max_gap >= 8);
}

TEST_CASE("orientation_bin: centers, boundaries and the zero vector") {
  CHECK(orientation_bin({1, 0}) == 0);
  CHECK(orientation_bin(Eigen::Vector2d(1, 1).normalized()) == 1);
  CHECK(orientation_bin({-1, 0}) == 4);
  CHECK(orientation_bin({0, 1}) == 2);
  CHECK(orientation_bin({0, -1}) == 6);
  for (int k = 0; k < 8; ++k) CHECK(orientation_bin(orientation_bin_center(k)) == k);
  CHECK_THROWS_AS(orientation_bin({0, 0}), InvalidInput);

  // Constant across each open 45-degree interval.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-22.4, 22.4);
  for (int k = 0; k < 8; ++k)
    for (int i = 0; i < 50; ++i) {
      const double a = (45.0 * k + d(rng)) * M_PI / 180.0;
      CHECK(orientation_bin({std::cos(a), std::sin(a)}) == k);
    }
}

TEST_CASE("foreground_depth: uniform patch, closer cluster, invalid patch") {
  DepthImage d(9, 9, 1.0f);
  CHECK(*foreground_depth(d, {4, 4}) == doctest::Approx(1.0));

  // Half the patch at 1 m, half at 3 m; the center pixel reads the far value
  // but the closer cluster wins.
  DepthImage split(9, 9, 3.0f);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c <= 3; ++c) split.at(r, c) = 1.0f;
  CHECK(*foreground_depth(split, {4, 4}) == doctest::Approx(1.0));

  DepthImage invalid(9, 9, 0.0f);
  CHECK(!foreground_depth(invalid, {4, 4}).has_value());

  // Fewer than min_cluster valid samples -> no usable cluster.
  DepthImage sparse(9, 9, 0.0f);
  sparse.at(4, 4) = 2.0f;
  sparse.at(4, 5) = 2.0f;
  CHECK(!foreground_depth(sparse, {4, 4}).has_value());
}

TEST_CASE("foreground_depth: result is the closest qualifying cluster center") {
  DepthImage d(9, 9, 5.0f);
  d.at(0, 0) = 2.0f;
  d.at(0, 1) = 2.02f;
  d.at(1, 0) = 1.98f;
  const auto z = foreground_depth(d, {2, 2});
  REQUIRE(z.has_value());
  CHECK(*z == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("build_edge_map_3d: single pixel, subsampling cap, invalid depths excluded") {
  const CameraIntrinsics K{500, 500, 320, 240, 640, 480};
  EdgeMap2D edges;
  edges.width = 640;
  edges.height = 480;
  edges.pixels.push_back({320, 240});
  edges.grad_dir.push_back({1, 0});
  edges.bin.push_back(0);

  DepthImage depth(640, 480, 2.0f);
  const EdgeMap3D one = build_edge_map_3d(edges, depth, K);
  REQUIRE(one.size() == 1);
  CHECK(one.points[0].isApprox(Point3(0, 0, 2), 1e-12));

  DepthImage holes(640, 480, 0.0f);
  CHECK(build_edge_map_3d(edges, holes, K).empty());

  // 10000 edge pixels capped at 6500.
  std::mt19937_64 rng(7);
  const EdgeMap2D many = test::random_edge_map(rng, 640, 480, 10000);
  const EdgeMap3D capped = build_edge_map_3d(many, depth, K, 6500);
  CHECK(capped.size() == 6500);

  // Points reproject onto their source pixels under the identity pose.
  for (size_t i = 0; i < capped.size(); i += 500) {
    const Pixel px = project(K, transform_to_frame(Pose::identity(), capped.points[i]));
    CHECK((px - capped.source_pixel[i]).norm() < 1e-9);
  }
}

TEST_CASE("uniform_subsample_indices: exact count, sorted, unique") {
  const auto idx = uniform_subsample_indices(10000, 6500);
  CHECK(idx.size() == 6500);
  for (size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  CHECK(idx.back() < 10000);
  CHECK(uniform_subsample_indices(5, 10).size() == 5);
}
