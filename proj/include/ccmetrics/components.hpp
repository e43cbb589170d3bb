#pragma once

// 26-connected component labeling.
//
// Two-pass raster scan with union-find over the 13 already-visited
// neighbours. Final ids are assigned in order of each component's first
// voxel in raster order, which is its lexicographically smallest (a,b,c)
// index, so labeling is canonical for a given mask.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ccmetrics/volume.hpp"

namespace ccm {

struct ComponentStats {
  std::size_t voxel_count = 0;
  Box bbox;
  /// Mean physical coordinate of the component's voxels.
  std::array<double, 3> centroid{0.0, 0.0, 0.0};
  double physical_volume = 0.0;
};

struct ComponentLabels {
  LabelVolume labels;
  std::uint32_t n = 0;
  /// stats[id - 1] describes component id.
  std::vector<ComponentStats> stats;

  const Dims& dims() const { return labels.dims(); }
  const Spacing& spacing() const { return labels.spacing(); }
  const ComponentStats& of(std::uint32_t id) const {
    if (id < 1 || id > n) throw std::out_of_range("invalid component id");
    return stats[id - 1];
  }
};

namespace detail {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const auto next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }
  void unite(std::uint32_t x, std::uint32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    if (x < y) std::swap(x, y);
    parent_[x] = y;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace detail

inline ComponentLabels label_components(const Mask3D& mask) {
  const auto& dims = mask.dims();
  const auto H = static_cast<std::ptrdiff_t>(dims.h);
  const auto W = static_cast<std::ptrdiff_t>(dims.w);
  const auto D = static_cast<std::ptrdiff_t>(dims.d);

  // Backward half of the 26-neighbourhood in raster order.
  static constexpr std::array<std::array<int, 3>, 13> kBack{{
      {-1, -1, -1}, {-1, -1, 0}, {-1, -1, 1}, {-1, 0, -1}, {-1, 0, 0}, {-1, 0, 1}, {-1, 1, -1},
      {-1, 1, 0},   {-1, 1, 1},  {0, -1, -1}, {0, -1, 0},  {0, -1, 1}, {0, 0, -1},
  }};

  std::vector<std::uint32_t> provisional(mask.size(), 0);
  detail::DisjointSet ds;
  ds.make();  // slot 0 = background

  for (std::ptrdiff_t a = 0; a < H; ++a)
    for (std::ptrdiff_t b = 0; b < W; ++b)
      for (std::ptrdiff_t c = 0; c < D; ++c) {
        const auto li = static_cast<std::size_t>((a * W + b) * D + c);
        if (mask[li] == 0) continue;
        std::uint32_t cur = 0;
        for (const auto& o : kBack) {
          const auto na = a + o[0], nb = b + o[1], nc = c + o[2];
          if (na < 0 || nb < 0 || nc < 0 || nb >= W || nc >= D) continue;
          const auto nl = provisional[static_cast<std::size_t>((na * W + nb) * D + nc)];
          if (nl == 0) continue;
          if (cur == 0) {
            cur = nl;
          } else if (nl != cur) {
            ds.unite(cur, nl);
          }
        }
        provisional[li] = cur != 0 ? cur : ds.make();
      }

  ComponentLabels out{LabelVolume(dims, mask.spacing()), 0, {}};
  std::vector<std::uint32_t> remap(ds.size(), 0);
  const auto& sp = mask.spacing();
  std::vector<std::array<double, 3>> sums;
  for (std::size_t li = 0; li < provisional.size(); ++li) {
    if (provisional[li] == 0) continue;
    const auto root = ds.find(provisional[li]);
    if (remap[root] == 0) {
      remap[root] = ++out.n;
      const Index3 first = mask.index(li);
      out.stats.push_back({0, Box{first, first}, {0, 0, 0}, 0.0});
      sums.push_back({0.0, 0.0, 0.0});
    }
    const auto id = remap[root];
    out.labels[li] = id;
    auto& st = out.stats[id - 1];
    const Index3 idx = mask.index(li);
    ++st.voxel_count;
    st.bbox.include(idx);
    auto& s = sums[id - 1];
    s[0] += static_cast<double>(idx.a);
    s[1] += static_cast<double>(idx.b);
    s[2] += static_cast<double>(idx.c);
  }
  for (std::size_t i = 0; i < out.stats.size(); ++i) {
    auto& st = out.stats[i];
    const double n = static_cast<double>(st.voxel_count);
    st.centroid = {sums[i][0] / n * sp.x, sums[i][1] / n * sp.y, sums[i][2] / n * sp.z};
    st.physical_volume = n * sp.voxel_volume();
  }
  return out;
}

/// Binary mask of a single component.
inline Mask3D component_mask(const ComponentLabels& cl, std::uint32_t id) {
  cl.of(id);
  Mask3D out(cl.dims(), cl.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cl.labels[i] == id ? 1 : 0;
  return out;
}

enum class SelectionRule { n_smallest, n_largest };

/// Component ids ordered by voxel count (ascending for n_smallest,
/// descending for n_largest), ties to the smaller id, truncated to n.
inline std::vector<std::uint32_t> select_components(const ComponentLabels& cl, SelectionRule rule,
                                                    std::size_t n) {
  if (n > cl.n) throw std::out_of_range("cannot select more components than exist");
  std::vector<std::uint32_t> ids(cl.n);
  std::iota(ids.begin(), ids.end(), 1u);
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t x, std::uint32_t y) {
    const auto cx = cl.stats[x - 1].voxel_count;
    const auto cy = cl.stats[y - 1].voxel_count;
    return rule == SelectionRule::n_smallest ? cx < cy : cx > cy;
  });
  ids.resize(n);
  return ids;
}

}  // namespace ccm
