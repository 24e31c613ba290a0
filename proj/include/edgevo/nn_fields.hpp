#pragma once

#include <array>
#include <optional>
#include <variant>

#include "edgevo/edge_extraction.hpp"

namespace edgevo {

enum class FieldKind { EDF, ANNF, ONNF };

/// Result of a field lookup: the nearest data pixel (u, v) for the queried
/// cell, invalid beyond the truncation radius.
struct NearestResult {
  Eigen::Vector2d nn = Eigen::Vector2d::Zero();
  bool valid = false;
};

/// Exact Euclidean distance to the nearest edge pixel, clamped at the
/// truncation radius. Queried with bilinear interpolation.
struct DistanceField {
  Image<float> dist;
  double truncation = 0.0;

  int width() const { return dist.width(); }
  int height() const { return dist.height(); }
};

/// Per-pixel integer coordinates of an exact nearest edge pixel. Equidistant
/// seeds resolve to the lexicographically smallest (row, col).
struct NNField {
  Image<int32_t> nn_row, nn_col;
  Image<uint8_t> valid;  // 0 beyond the truncation radius
  double truncation = 0.0;

  int width() const { return nn_row.width(); }
  int height() const { return nn_row.height(); }
};

/// Eight NNFields, one per orientation bin; layer k is seeded by exactly the
/// edge pixels whose gradient inclination falls into bin k. Bins without
/// seeds are all-invalid.
struct OrientedNNField {
  std::array<NNField, 8> bins;

  int width() const { return bins[0].width(); }
  int height() const { return bins[0].height(); }
};

/// Adaptively sampled oriented field: per bin, a layered pyramid (exact
/// within a Chebyshev band of the seeds at layer 0, coarser octaves filled
/// only adjacent to occupied cells) concatenated into one full-resolution
/// index map. Cells unreachable through the layers stay invalid — the
/// implicit truncation of the neighbour field.
struct AdaptiveNNField {
  std::array<NNField, 8> bins;  // concatenated result, same query interface
  int layers = 3;
  int band = 2;

  int width() const { return bins[0].width(); }
  int height() const { return bins[0].height(); }
};

using FieldVariant = std::variant<DistanceField, NNField, OrientedNNField, AdaptiveNNField>;

struct AdaptiveOptions {
  bool enabled = false;
  int layers = 3;
  int band = 2;  // Chebyshev radius of the exact layer-0 band
};

DistanceField compute_edf(const EdgeMap2D& edges, double truncation);

NNField compute_annf(const EdgeMap2D& edges, double truncation);

/// Builds the eight per-bin fields (in parallel). With adaptive sampling
/// enabled, each bin is the layered/concatenated structure instead of a full
/// exact field. Throws when every bin is empty.
std::variant<OrientedNNField, AdaptiveNNField> compute_onnf(const EdgeMap2D& edges,
                                                            double truncation,
                                                            const AdaptiveOptions& adaptive = {});

/// Convenience dispatcher used by the tracker.
FieldVariant compute_field(const EdgeMap2D& edges, FieldKind kind, double truncation,
                           const AdaptiveOptions& adaptive = {});

/// Lookup at the integer cell nearest to px (round-half-up per coordinate).
/// Returns nullopt when the rounded cell lies outside the image; the caller
/// drops such residuals.
std::optional<NearestResult> nearest(const NNField& field, const Pixel& px);
std::optional<NearestResult> nearest(const OrientedNNField& field, const Pixel& px, int bin);
std::optional<NearestResult> nearest(const AdaptiveNNField& field, const Pixel& px, int bin);

/// Bilinear blend of the four surrounding cells; px must lie inside
/// [0, w-1] x [0, h-1].
double sample_edf_bilinear(const DistanceField& field, const Pixel& px);

/// Internal building block shared by all field constructors: exact squared
/// Euclidean distances plus argmin seed coordinates (two-pass transform with
/// index propagation). Exposed for tests.
struct IndexedDistanceTransform {
  Image<int64_t> dist2;
  Image<int32_t> nn_row, nn_col;
};
IndexedDistanceTransform indexed_edt(const std::vector<Eigen::Vector2i>& seeds, int width,
                                     int height);

}  // namespace edgevo
