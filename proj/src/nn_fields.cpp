#include "edgevo/nn_fields.hpp"

#include <limits>

namespace edgevo {

namespace {

constexpr int32_t kNoSeed = -1;

inline int64_t floor_div(int64_t a, int64_t b) {  // b > 0
  const int64_t q = a / b, r = a % b;
  return (r != 0 && r < 0) ? q - 1 : q;
}

inline int round_coord(double x) { return static_cast<int>(std::llround(x)); }

}  // namespace

// Two-pass exact Euclidean distance transform that also propagates the argmin
// seed. Pass 1 finds the nearest seed column within each row (ties keep the
// smaller column); pass 2 takes the lower envelope of parabolas over rows per
// column (ties keep the smaller row). Together the reported neighbour is the
// lexicographically smallest (row, col) among all equidistant seeds.
IndexedDistanceTransform indexed_edt(const std::vector<Eigen::Vector2i>& seeds, int width,
                                     int height) {
  IndexedDistanceTransform out;
  out.dist2 = Image<int64_t>(width, height, std::numeric_limits<int64_t>::max());
  out.nn_row = Image<int32_t>(width, height, kNoSeed);
  out.nn_col = Image<int32_t>(width, height, kNoSeed);

  Image<uint8_t> mask(width, height, 0);
  for (const auto& s : seeds) {
    if (s.x() < 0 || s.x() >= width || s.y() < 0 || s.y() >= height)
      throw InvalidInput("indexed_edt: seed outside image");
    mask.at(s.y(), s.x()) = 1;
  }

  // Pass 1: nearest seed column per row.
  Image<int32_t> row_nc(width, height, kNoSeed);
  parallel_for(0, height, [&](int r) {
    int32_t last = kNoSeed;
    for (int c = 0; c < width; ++c) {
      if (mask.at(r, c)) last = c;
      row_nc.at(r, c) = last;
    }
    last = kNoSeed;
    for (int c = width - 1; c >= 0; --c) {
      if (mask.at(r, c)) last = c;
      if (last != kNoSeed) {
        const int32_t cur = row_nc.at(r, c);
        if (cur == kNoSeed || (last - c) < (c - cur)) row_nc.at(r, c) = last;
      }
    }
  });

  // Pass 2: per column, lower envelope over candidate rows.
  parallel_for(0, width, [&](int c) {
    std::vector<int32_t> v(height);
    std::vector<int64_t> z(height);
    std::vector<int64_t> f(height);
    int k = -1;
    for (int r = 0; r < height; ++r) {
      const int32_t nc = row_nc.at(r, c);
      if (nc == kNoSeed) continue;
      const int64_t d = static_cast<int64_t>(c) - nc;
      const int64_t fr = d * d;
      // First query row where parabola r strictly beats parabola v[k].
      int64_t s = 0;
      while (k >= 0) {
        const int64_t num =
            static_cast<int64_t>(r) * r + fr - static_cast<int64_t>(v[k]) * v[k] - f[v[k]];
        const int64_t den = 2 * (static_cast<int64_t>(r) - v[k]);
        s = floor_div(num, den) + 1;
        if (s <= z[k])
          --k;
        else
          break;
      }
      if (k < 0) {
        k = 0;
        v[0] = r;
        z[0] = std::numeric_limits<int64_t>::min();
      } else {
        ++k;
        v[k] = r;
        z[k] = s;
      }
      f[r] = fr;
    }
    if (k < 0) return;  // no seeds reach this column through any row
    int j = 0;
    for (int r = 0; r < height; ++r) {
      while (j < k && z[j + 1] <= r) ++j;
      const int32_t br = v[j];
      const int64_t dr = static_cast<int64_t>(r) - br;
      const int64_t dc = static_cast<int64_t>(c) - row_nc.at(br, c);
      out.dist2.at(r, c) = dr * dr + dc * dc;
      out.nn_row.at(r, c) = br;
      out.nn_col.at(r, c) = row_nc.at(br, c);
    }
  });

  return out;
}

namespace {

NNField annf_from_seeds(const std::vector<Eigen::Vector2i>& seeds, int width, int height,
                        double truncation) {
  const IndexedDistanceTransform edt = indexed_edt(seeds, width, height);
  NNField field;
  field.truncation = truncation;
  field.nn_row = edt.nn_row;
  field.nn_col = edt.nn_col;
  field.valid = Image<uint8_t>(width, height, 0);
  const double t2 = truncation * truncation;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int64_t d2 = edt.dist2.at(r, c);
      if (d2 != std::numeric_limits<int64_t>::max() && static_cast<double>(d2) <= t2)
        field.valid.at(r, c) = 1;
    }
  return field;
}

NNField invalid_field(int width, int height, double truncation) {
  NNField field;
  field.truncation = truncation;
  field.nn_row = Image<int32_t>(width, height, kNoSeed);
  field.nn_col = Image<int32_t>(width, height, kNoSeed);
  field.valid = Image<uint8_t>(width, height, 0);
  return field;
}

// Layered construction of Fig.-5 style adaptively sampled fields: layer 0 is
// exact within a Chebyshev band of the seeds, higher octaves keep, for every
// grid cell adjacent to an occupied cell (radius-3 adjacency), the seed
// closest to the cell center. Concatenation copies from the highest layer
// downwards so finer information overwrites coarser. The radius-3 fill keeps
// a cell's stored seed within a factor 2 of the true minimum for every cell
// the layers reach: a pixel left to layer l has a true distance of at least
// 4*2^(l-1)-3, which dominates twice the cell-center offset (2^l - 1) * sqrt(2).
NNField adaptive_from_seeds(const std::vector<Eigen::Vector2i>& seeds, int width, int height,
                            double truncation, int layers, int band) {
  NNField field = invalid_field(width, height, truncation);
  if (seeds.empty()) return field;

  const double t2 = truncation * truncation;
  auto store = [&](int r, int c, int32_t sr, int32_t sc) {
    const double dr = r - sr, dc = c - sc;
    if (dr * dr + dc * dc > t2) return;
    field.nn_row.at(r, c) = sr;
    field.nn_col.at(r, c) = sc;
    field.valid.at(r, c) = 1;
  };

  // Coarse layers first (highest octave down to layer 1).
  for (int l = layers - 1; l >= 1; --l) {
    const int g = 1 << l;
    const int wl = (width + g - 1) / g, hl = (height + g - 1) / g;
    const double half = (g - 1) / 2.0;
    Image<double> best(wl, hl, std::numeric_limits<double>::infinity());
    Image<int32_t> cand_r(wl, hl, kNoSeed), cand_c(wl, hl, kNoSeed);
    for (const auto& s : seeds) {
      const int cr = s.y() / g, cc = s.x() / g;
      for (int dr = -3; dr <= 3; ++dr)
        for (int dc = -3; dc <= 3; ++dc) {
          const int qr = cr + dr, qc = cc + dc;
          if (qr < 0 || qr >= hl || qc < 0 || qc >= wl) continue;
          const double dy = qr * g + half - s.y();
          const double dx = qc * g + half - s.x();
          const double d2 = dx * dx + dy * dy;
          double& b = best.at(qr, qc);
          if (d2 < b || (d2 == b && (s.y() < cand_r.at(qr, qc) ||
                                     (s.y() == cand_r.at(qr, qc) && s.x() < cand_c.at(qr, qc))))) {
            b = d2;
            cand_r.at(qr, qc) = s.y();
            cand_c.at(qr, qc) = s.x();
          }
        }
    }
    for (int qr = 0; qr < hl; ++qr)
      for (int qc = 0; qc < wl; ++qc) {
        if (cand_r.at(qr, qc) == kNoSeed) continue;
        const int r1 = std::min((qr + 1) * g, height), c1 = std::min((qc + 1) * g, width);
        for (int r = qr * g; r < r1; ++r)
          for (int c = qc * g; c < c1; ++c) store(r, c, cand_r.at(qr, qc), cand_c.at(qr, qc));
      }
  }

  // Layer 0: exact nearest neighbours within the band. A pixel within
  // Chebyshev distance `band` of a seed has its true nearest seed within a
  // window of radius floor(band * sqrt(2)).
  const int win = static_cast<int>(std::floor(band * std::sqrt(2.0)));
  Image<uint8_t> mask(width, height, 0);
  for (const auto& s : seeds) mask.at(s.y(), s.x()) = 1;
  Image<uint8_t> in_band(width, height, 0);
  for (const auto& s : seeds) {
    const int r0 = std::max(0, s.y() - band), r1 = std::min(height - 1, s.y() + band);
    const int c0 = std::max(0, s.x() - band), c1 = std::min(width - 1, s.x() + band);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) in_band.at(r, c) = 1;
  }
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      if (!in_band.at(r, c)) continue;
      int64_t bd2 = std::numeric_limits<int64_t>::max();
      int32_t br = kNoSeed, bc = kNoSeed;
      const int r0 = std::max(0, r - win), r1 = std::min(height - 1, r + win);
      const int c0 = std::max(0, c - win), c1 = std::min(width - 1, c + win);
      for (int sr = r0; sr <= r1; ++sr)
        for (int sc = c0; sc <= c1; ++sc) {
          if (!mask.at(sr, sc)) continue;
          const int64_t d2 =
              static_cast<int64_t>(sr - r) * (sr - r) + static_cast<int64_t>(sc - c) * (sc - c);
          if (d2 < bd2) {  // row-major scan order already yields the lex-smallest tie
            bd2 = d2;
            br = sr;
            bc = sc;
          }
        }
      store(r, c, br, bc);
    }

  return field;
}

}  // namespace

DistanceField compute_edf(const EdgeMap2D& edges, double truncation) {
  if (edges.empty()) throw InvalidInput("compute_edf: empty edge set");
  const IndexedDistanceTransform edt = indexed_edt(edges.pixels, edges.width, edges.height);
  DistanceField field;
  field.truncation = truncation;
  field.dist = Image<float>(edges.width, edges.height);
  for (int r = 0; r < edges.height; ++r)
    for (int c = 0; c < edges.width; ++c)
      field.dist.at(r, c) = static_cast<float>(
          std::min(std::sqrt(static_cast<double>(edt.dist2.at(r, c))), truncation));
  return field;
}

NNField compute_annf(const EdgeMap2D& edges, double truncation) {
  if (edges.empty()) throw InvalidInput("compute_annf: empty edge set");
  return annf_from_seeds(edges.pixels, edges.width, edges.height, truncation);
}

std::variant<OrientedNNField, AdaptiveNNField> compute_onnf(const EdgeMap2D& edges,
                                                            double truncation,
                                                            const AdaptiveOptions& adaptive) {
  if (edges.empty()) throw InvalidInput("compute_onnf: empty edge set");

  std::array<std::vector<Eigen::Vector2i>, 8> per_bin;
  for (size_t i = 0; i < edges.size(); ++i) per_bin[edges.bin[i]].push_back(edges.pixels[i]);

  std::array<NNField, 8> bins;
  parallel_for(0, 8, [&](int b) {
    if (per_bin[b].empty()) {
      bins[b] = invalid_field(edges.width, edges.height, truncation);
    } else if (adaptive.enabled) {
      bins[b] = adaptive_from_seeds(per_bin[b], edges.width, edges.height, truncation,
                                    adaptive.layers, adaptive.band);
    } else {
      bins[b] = annf_from_seeds(per_bin[b], edges.width, edges.height, truncation);
    }
  });

  if (adaptive.enabled) {
    AdaptiveNNField field;
    field.bins = std::move(bins);
    field.layers = adaptive.layers;
    field.band = adaptive.band;
    return field;
  }
  OrientedNNField field;
  field.bins = std::move(bins);
  return field;
}

FieldVariant compute_field(const EdgeMap2D& edges, FieldKind kind, double truncation,
                           const AdaptiveOptions& adaptive) {
  switch (kind) {
    case FieldKind::EDF:
      return compute_edf(edges, truncation);
    case FieldKind::ANNF:
      return compute_annf(edges, truncation);
    case FieldKind::ONNF: {
      auto f = compute_onnf(edges, truncation, adaptive);
      if (std::holds_alternative<OrientedNNField>(f))
        return std::get<OrientedNNField>(std::move(f));
      return std::get<AdaptiveNNField>(std::move(f));
    }
  }
  throw InvalidInput("compute_field: unknown kind");
}

std::optional<NearestResult> nearest(const NNField& field, const Pixel& px) {
  if (!px.allFinite()) throw InvalidInput("nearest: non-finite pixel");
  const int c = round_coord(px.x()), r = round_coord(px.y());
  if (r < 0 || r >= field.height() || c < 0 || c >= field.width()) return std::nullopt;
  NearestResult res;
  res.valid = field.valid.at(r, c) != 0;
  if (res.valid)
    res.nn = Eigen::Vector2d(field.nn_col.at(r, c), field.nn_row.at(r, c));
  return res;
}

std::optional<NearestResult> nearest(const OrientedNNField& field, const Pixel& px, int bin) {
  if (bin < 0 || bin > 7) throw InvalidInput("nearest: bin out of range");
  return nearest(field.bins[bin], px);
}

std::optional<NearestResult> nearest(const AdaptiveNNField& field, const Pixel& px, int bin) {
  if (bin < 0 || bin > 7) throw InvalidInput("nearest: bin out of range");
  return nearest(field.bins[bin], px);
}

double sample_edf_bilinear(const DistanceField& field, const Pixel& px) {
  const int w = field.width(), h = field.height();
  if (w < 2 || h < 2) throw InvalidInput("sample_edf_bilinear: field too small");
  const double u = px.x(), v = px.y();
  if (!(u >= 0.0) || !(v >= 0.0) || !(u <= w - 1.0) || !(v <= h - 1.0))
    throw InvalidInput("sample_edf_bilinear: pixel outside field");
  int c0 = std::min(static_cast<int>(std::floor(u)), w - 2);
  int r0 = std::min(static_cast<int>(std::floor(v)), h - 2);
  c0 = std::max(c0, 0);
  r0 = std::max(r0, 0);
  const double fu = u - c0, fv = v - r0;
  const double d00 = field.dist.at(r0, c0), d01 = field.dist.at(r0, c0 + 1);
  const double d10 = field.dist.at(r0 + 1, c0), d11 = field.dist.at(r0 + 1, c0 + 1);
  return (1 - fv) * ((1 - fu) * d00 + fu * d01) + fv * ((1 - fu) * d10 + fu * d11);
}

}  // namespace edgevo
