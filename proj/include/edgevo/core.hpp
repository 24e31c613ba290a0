#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace edgevo {

// Pixel convention: u = x = column, v = y = row. Sub-pixel coordinates are
// real-valued; rounding to the integer grid happens only at field lookup.
using Pixel = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or argument violation (behind-camera, invalid depth, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Dataset / file problems.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Fewer valid residuals than required for a solve.
class InsufficientOverlap : public Error {
 public:
  using Error::Error;
};

/// Singular normal equations: at least one motion direction unobservable.
class RankDeficient : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ReferenceCreationError : public Error {
 public:
  using Error::Error;
};

/// Dense row-major single-channel image.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : w_(width), h_(height), data_(static_cast<size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0) throw InvalidInput("Image: non-positive size");
  }

  int width() const { return w_; }
  int height() const { return h_; }
  bool empty() const { return data_.empty(); }
  size_t size() const { return data_.size(); }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < h_ && col >= 0 && col < w_;
  }

  T& at(int row, int col) {
    assert(in_bounds(row, col));
    return data_[static_cast<size_t>(row) * w_ + col];
  }
  const T& at(int row, int col) const {
    assert(in_bounds(row, col));
    return data_[static_cast<size_t>(row) * w_ + col];
  }

  T* row(int r) { return data_.data() + static_cast<size_t>(r) * w_; }
  const T* row(int r) const { return data_.data() + static_cast<size_t>(r) * w_; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

 private:
  int w_ = 0, h_ = 0;
  std::vector<T> data_;
};

using GrayImage = Image<float>;   // intensities, nominally 0..255
using DepthImage = Image<float>;  // meters (or world units); <=0 / NaN invalid

inline bool depth_valid(float z) { return std::isfinite(z) && z > 0.0f; }

/// Runs fn(i) for i in [begin, end) on up to hardware_concurrency threads.
/// Results must be written to disjoint slots so the output is independent of
/// the scheduling.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn, int max_threads = 0) {
  const int n = end - begin;
  if (n <= 0) return;
  int threads = max_threads > 0 ? max_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, n);
  if (threads == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<int> next{begin};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace edgevo
