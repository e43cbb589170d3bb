#pragma once

// Exact Euclidean distance transform on an anisotropic voxel grid.
//
// Separable squared transform: a linear nearest-source sweep along c, then
// lower-envelope-of-parabolas passes along b and a. Squared distances are
// accumulated in that order, so for a source at offset (da, db, dc)
//
//   dsq = ((sz*sz)*dc^2 + (sy*sy)*db^2) + (sx*sx)*da^2
//
// and the value at each voxel is the minimum of this expression over all
// sources, bit for bit (rounding is monotone, so min and + commute).

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ccmetrics/parallel.hpp"
#include "ccmetrics/volume.hpp"

namespace ccm::edt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One physical-axis contribution to a squared distance.
inline double axis_term(double spacing_sq, std::ptrdiff_t delta) {
  return spacing_sq * static_cast<double>(delta * delta);
}

namespace detail {

// Nearest source along one line, exact in index units.
inline void nearest_source_line(std::span<const std::uint8_t> src, std::span<double> out,
                                double spacing_sq) {
  const auto n = static_cast<std::ptrdiff_t>(src.size());
  constexpr std::ptrdiff_t kNone = std::numeric_limits<std::ptrdiff_t>::max() / 4;
  std::vector<std::ptrdiff_t> dist(static_cast<std::size_t>(n), kNone);
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (src[static_cast<std::size_t>(i)]) last = i;
    if (last >= 0) dist[static_cast<std::size_t>(i)] = i - last;
  }
  last = -1;
  for (std::ptrdiff_t i = n - 1; i >= 0; --i) {
    if (src[static_cast<std::size_t>(i)]) last = i;
    if (last >= 0) dist[static_cast<std::size_t>(i)] = std::min(dist[static_cast<std::size_t>(i)], last - i);
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto d = dist[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = d == kNone ? kInf : axis_term(spacing_sq, d);
  }
}

// Lower envelope of parabolas f(v) + w (q - v)^2 over finite f(v).
// Scratch buffers are passed in to avoid per-line allocation.
struct EnvelopeScratch {
  std::vector<double> f;
  std::vector<std::ptrdiff_t> v;
  std::vector<double> z;
};

inline void envelope_line(std::span<double> line, double w, EnvelopeScratch& s) {
  const auto n = static_cast<std::ptrdiff_t>(line.size());
  s.f.assign(line.begin(), line.end());
  s.v.resize(static_cast<std::size_t>(n));
  s.z.resize(static_cast<std::size_t>(n) + 1);
  auto value = [&](std::ptrdiff_t site, std::ptrdiff_t q) {
    return s.f[static_cast<std::size_t>(site)] + axis_term(w, q - site);
  };
  auto intersect = [&](std::ptrdiff_t p, std::ptrdiff_t q) {
    const double fp = s.f[static_cast<std::size_t>(p)] + w * static_cast<double>(p * p);
    const double fq = s.f[static_cast<std::size_t>(q)] + w * static_cast<double>(q * q);
    return (fq - fp) / (2.0 * w * static_cast<double>(q - p));
  };

  std::ptrdiff_t k = -1;
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    if (s.f[static_cast<std::size_t>(q)] == kInf) continue;
    if (k < 0) {
      k = 0;
      s.v[0] = q;
      s.z[0] = -kInf;
      s.z[1] = kInf;
      continue;
    }
    double x = intersect(s.v[static_cast<std::size_t>(k)], q);
    while (k > 0 && x <= s.z[static_cast<std::size_t>(k)]) {
      --k;
      x = intersect(s.v[static_cast<std::size_t>(k)], q);
    }
    ++k;
    s.v[static_cast<std::size_t>(k)] = q;
    s.z[static_cast<std::size_t>(k)] = x;
    s.z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  if (k < 0) {
    std::fill(line.begin(), line.end(), kInf);
    return;
  }
  std::ptrdiff_t j = 0;
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    while (s.z[static_cast<std::size_t>(j) + 1] < static_cast<double>(q)) ++j;
    // Intersections are rounded; neighbouring parabolas guard against
    // picking a marginally non-minimal site near a breakpoint.
    double best = value(s.v[static_cast<std::size_t>(j)], q);
    if (j > 0) best = std::min(best, value(s.v[static_cast<std::size_t>(j) - 1], q));
    if (j < k) best = std::min(best, value(s.v[static_cast<std::size_t>(j) + 1], q));
    line[static_cast<std::size_t>(q)] = best;
  }
}

}  // namespace detail

/// Squared physical distance from every voxel of a grid to the nearest voxel
/// with source[i] != 0; +inf everywhere when there is no source.
inline std::vector<double> squared_transform(const Dims& dims, const Spacing& spacing,
                                             std::span<const std::uint8_t> source,
                                             unsigned threads = 1) {
  const std::size_t H = dims.h, W = dims.w, D = dims.d;
  std::vector<double> out(dims.voxels());
  const double wx = spacing.x * spacing.x;
  const double wy = spacing.y * spacing.y;
  const double wz = spacing.z * spacing.z;

  // Pass 1: along c, contiguous.
  parallel_for(H * W, threads, [&](std::size_t row) {
    detail::nearest_source_line(source.subspan(row * D, D), std::span(out).subspan(row * D, D), wz);
  });

  // Pass 2: along b, one job per (a) slab.
  parallel_for(H, threads, [&](std::size_t a) {
    detail::EnvelopeScratch scratch;
    std::vector<double> line(W);
    for (std::size_t c = 0; c < D; ++c) {
      for (std::size_t b = 0; b < W; ++b) line[b] = out[(a * W + b) * D + c];
      detail::envelope_line(line, wy, scratch);
      for (std::size_t b = 0; b < W; ++b) out[(a * W + b) * D + c] = line[b];
    }
  });

  // Pass 3: along a, one job per (b) column.
  parallel_for(W, threads, [&](std::size_t b) {
    detail::EnvelopeScratch scratch;
    std::vector<double> line(H);
    for (std::size_t c = 0; c < D; ++c) {
      for (std::size_t a = 0; a < H; ++a) line[a] = out[(a * W + b) * D + c];
      detail::envelope_line(line, wx, scratch);
      for (std::size_t a = 0; a < H; ++a) out[(a * W + b) * D + c] = line[a];
    }
  });
  return out;
}

/// Squared distance from each query voxel to the nearest source voxel, both
/// given as grid indices. The transform runs on the bounding box of both
/// sets only, which is exact because every minimising path stays in it.
inline std::vector<double> squared_distances_to(std::span<const Index3> queries,
                                                std::span<const Index3> sources,
                                                const Spacing& spacing, unsigned threads = 1) {
  std::vector<double> out(queries.size(), kInf);
  if (queries.empty() || sources.empty()) return out;
  Box box{sources.front(), sources.front()};
  for (const auto& s : sources) box.include(s);
  for (const auto& q : queries) box.include(q);
  const Dims bd = box.dims();
  std::vector<std::uint8_t> flags(bd.voxels(), 0);
  auto local = [&](const Index3& i) {
    const Index3 l = i - box.lo;
    return (static_cast<std::size_t>(l.a) * bd.w + static_cast<std::size_t>(l.b)) * bd.d +
           static_cast<std::size_t>(l.c);
  };
  for (const auto& s : sources) flags[local(s)] = 1;
  const auto field = squared_transform(bd, spacing, flags, threads);
  for (std::size_t i = 0; i < queries.size(); ++i) out[i] = field[local(queries[i])];
  return out;
}

}  // namespace ccm::edt
