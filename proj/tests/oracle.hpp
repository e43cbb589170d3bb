#pragma once

// Brute-force reference implementations and random generators for tests.
// Nothing here calls into the library's algorithms; only the Volume
// container types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "ccmetrics/volume.hpp"

namespace oracle {

using ccm::Dims;
using ccm::Index3;
using ccm::Mask3D;
using ccm::Spacing;

template <typename T>
std::vector<T> to_vector(const ccm::Volume<T>& v) {
  return {v.values().begin(), v.values().end()};
}

inline std::vector<Index3> foreground(const Mask3D& m) {
  std::vector<Index3> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i]) out.push_back(m.index(i));
  return out;
}

/// Squared physical distance, summed c, b, a as the library documents.
inline double dsq(const Index3& x, const Index3& y, const Spacing& s) {
  const double da = static_cast<double>((x.a - y.a) * (x.a - y.a));
  const double db = static_cast<double>((x.b - y.b) * (x.b - y.b));
  const double dc = static_cast<double>((x.c - y.c) * (x.c - y.c));
  return ((s.z * s.z) * dc + (s.y * s.y) * db) + (s.x * s.x) * da;
}

/// BFS flood fill over the 26-neighbourhood; components numbered in order
/// of their first voxel in raster order.
inline std::vector<std::uint32_t> flood_labels(const Mask3D& m, std::uint32_t& n) {
  std::vector<std::uint32_t> lab(m.size(), 0);
  n = 0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!m[s] || lab[s]) continue;
    lab[s] = ++n;
    std::deque<std::size_t> q{s};
    while (!q.empty()) {
      const Index3 v = m.index(q.front());
      q.pop_front();
      for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
          for (int c = -1; c <= 1; ++c) {
            const Index3 u{v.a + a, v.b + b, v.c + c};
            if (!m.in_bounds(u)) continue;
            const auto lu = m.linear(u);
            if (m[lu] && !lab[lu]) {
              lab[lu] = n;
              q.push_back(lu);
            }
          }
    }
  }
  return lab;
}

/// Exhaustive nearest component with smallest-id tie-break.
inline std::vector<std::uint32_t> nearest_component(const Mask3D& m,
                                                    const std::vector<std::uint32_t>& labels,
                                                    std::uint32_t n) {
  std::vector<std::vector<Index3>> sites(n + 1);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (labels[i]) sites[labels[i]].push_back(m.index(i));
  std::vector<std::uint32_t> out(m.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Index3 t = m.index(i);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::uint32_t id = 1; id <= n; ++id) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& k : sites[id]) d = std::min(d, dsq(t, k, m.spacing()));
      if (d < best) {
        best = d;
        arg = id;
      }
    }
    out[i] = arg;
  }
  return out;
}

/// Minimum physical distance from each voxel to the given source set.
inline std::vector<double> distance_to(const Mask3D& grid, const std::vector<Index3>& sources) {
  std::vector<double> out(grid.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Index3 t = grid.index(i);
    for (const auto& s : sources) out[i] = std::min(out[i], std::sqrt(dsq(t, s, grid.spacing())));
  }
  return out;
}

inline std::vector<Index3> surface(const Mask3D& m) {
  std::vector<Index3> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    const Index3 v = m.index(i);
    const Index3 nb[6] = {{v.a - 1, v.b, v.c}, {v.a + 1, v.b, v.c}, {v.a, v.b - 1, v.c},
                          {v.a, v.b + 1, v.c}, {v.a, v.b, v.c - 1}, {v.a, v.b, v.c + 1}};
    for (const auto& u : nb) {
      if (!m.in_bounds(u) || !m[u]) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

inline std::vector<double> directed(const std::vector<Index3>& from, const std::vector<Index3>& to,
                                    const Spacing& sp) {
  std::vector<double> out;
  for (const auto& f : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : to) best = std::min(best, dsq(f, t, sp));
    out.push_back(std::sqrt(best));
  }
  return out;
}

struct SurfaceOracle {
  std::vector<double> p_to_s;
  std::vector<double> s_to_p;

  std::vector<double> pooled() const {
    auto all = p_to_s;
    all.insert(all.end(), s_to_p.begin(), s_to_p.end());
    std::sort(all.begin(), all.end());
    return all;
  }
  double hd(double q) const {
    const auto all = pooled();
    const double pos = q / 100.0 * static_cast<double>(all.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= all.size()) return all.back();
    return all[i] + (pos - static_cast<double>(i)) * (all[i + 1] - all[i]);
  }
  double hd100() const {
    double m = 0;
    for (double v : p_to_s) m = std::max(m, v);
    for (double v : s_to_p) m = std::max(m, v);
    return m;
  }
  double assd() const {
    double sum = 0;
    for (double v : p_to_s) sum += v;
    for (double v : s_to_p) sum += v;
    return sum / static_cast<double>(p_to_s.size() + s_to_p.size());
  }
  double nsd(double tau) const {
    std::size_t hit = 0;
    for (double v : p_to_s) hit += v <= tau;
    for (double v : s_to_p) hit += v <= tau;
    return static_cast<double>(hit) / static_cast<double>(p_to_s.size() + s_to_p.size());
  }
};

inline SurfaceOracle surfaces(const Mask3D& p, const Mask3D& s) {
  const auto sp = surface(p);
  const auto ss = surface(s);
  return {directed(sp, ss, p.spacing()), directed(ss, sp, p.spacing())};
}

/// Morphology from the neighbourhood definition; out-of-grid reads as 0.
inline Mask3D morph(const Mask3D& m, bool cube, int radius, bool erode) {
  Mask3D out(m.dims(), m.spacing());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Index3 v = m.index(i);
    bool all = true, any = false;
    for (int a = -radius; a <= radius; ++a)
      for (int b = -radius; b <= radius; ++b)
        for (int c = -radius; c <= radius; ++c) {
          if (!cube && std::abs(a) + std::abs(b) + std::abs(c) > radius) continue;
          const Index3 u{v.a + a, v.b + b, v.c + c};
          const bool set = m.in_bounds(u) && m[u];
          all = all && set;
          any = any || set;
        }
    out[i] = erode ? all : any;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generators

inline Mask3D random_mask(std::mt19937_64& rng, const Dims& dims, const Spacing& sp, double density) {
  std::bernoulli_distribution bit(density);
  Mask3D m(dims, sp);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = bit(rng) ? 1 : 0;
  return m;
}

/// Sparse random blobs: `seeds` random walks of up to `length` voxels.
inline Mask3D random_blobs(std::mt19937_64& rng, const Dims& dims, const Spacing& sp, int seeds, int length) {
  Mask3D m(dims, sp);
  std::uniform_int_distribution<std::ptrdiff_t> ua(0, static_cast<std::ptrdiff_t>(dims.h) - 1);
  std::uniform_int_distribution<std::ptrdiff_t> ub(0, static_cast<std::ptrdiff_t>(dims.w) - 1);
  std::uniform_int_distribution<std::ptrdiff_t> uc(0, static_cast<std::ptrdiff_t>(dims.d) - 1);
  std::uniform_int_distribution<int> step(-1, 1);
  std::uniform_int_distribution<int> len(1, length);
  for (int s = 0; s < seeds; ++s) {
    Index3 v{ua(rng), ub(rng), uc(rng)};
    const int l = len(rng);
    for (int k = 0; k < l; ++k) {
      if (m.in_bounds(v)) m[v] = 1;
      v = {v.a + step(rng), v.b + step(rng), v.c + step(rng)};
    }
  }
  return m;
}

inline Spacing random_spacing(std::mt19937_64& rng, bool anisotropic) {
  if (!anisotropic) return {1.0, 1.0, 1.0};
  // Mix of dyadic values and ones with inexact binary expansions.
  static constexpr double kChoices[] = {0.5, 0.75, 1.0, 1.25, 2.0, 3.0, 0.7, 1.3, 0.9};
  std::uniform_int_distribution<int> pick(0, 8);
  return {kChoices[pick(rng)], kChoices[pick(rng)], kChoices[pick(rng)]};
}

inline Dims random_dims(std::mt19937_64& rng, std::size_t max_edge) {
  std::uniform_int_distribution<std::size_t> e(1, max_edge);
  return {e(rng), e(rng), e(rng)};
}

}  // namespace oracle
