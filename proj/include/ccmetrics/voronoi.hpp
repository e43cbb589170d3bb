#pragma once

// Generalized Voronoi partition around ground-truth connected components.
//
// Every voxel is assigned to the component at minimal Euclidean distance
// (minimum over the component's voxels); exact ties go to the smallest
// component id. Distance fields are computed one component at a time and
// folded into a running (distance, id) argmin, so memory stays at two
// volume-sized buffers plus one transform scratch regardless of n.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ccmetrics/components.hpp"
#include "ccmetrics/edt.hpp"
#include "ccmetrics/error.hpp"

namespace ccm {

struct DistanceField {
  Volume<double> values;
  std::uint32_t source_component = 0;
};

struct VoronoiPartition {
  LabelVolume region;
  std::uint32_t n = 0;

  const Dims& dims() const { return region.dims(); }
  const Spacing& spacing() const { return region.spacing(); }
};

namespace detail {

inline std::vector<double> component_squared_field(const ComponentLabels& cl, std::uint32_t id,
                                                   unsigned threads) {
  std::vector<std::uint8_t> src(cl.labels.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = cl.labels[i] == id ? 1 : 0;
  return edt::squared_transform(cl.dims(), cl.spacing(), src, threads);
}

}  // namespace detail

/// Physical distance from every voxel to component id (0 on the component).
inline DistanceField distance_transform(const ComponentLabels& cl, std::uint32_t id,
                                        unsigned threads = 1) {
  if (id < 1 || id > cl.n) throw std::out_of_range("invalid component id");
  auto sq = detail::component_squared_field(cl, id, threads);
  for (auto& v : sq) v = std::sqrt(v);
  return {Volume<double>(cl.dims(), cl.spacing(), std::move(sq)), id};
}

inline VoronoiPartition build_partition(const ComponentLabels& cl, unsigned threads = 1) {
  if (cl.n == 0) throw EmptyGroundTruth();
  VoronoiPartition vp{LabelVolume(cl.dims(), cl.spacing(), 1u), cl.n};
  if (cl.n == 1) return vp;

  std::vector<double> best = detail::component_squared_field(cl, 1, threads);
  for (std::uint32_t id = 2; id <= cl.n; ++id) {
    const auto field = detail::component_squared_field(cl, id, threads);
    // Ids arrive in increasing order, so strict < keeps the smaller id on ties.
    parallel_for(field.size(), threads, [&](std::size_t i) {
      if (field[i] < best[i]) {
        best[i] = field[i];
        vp.region[i] = id;
      }
    });
  }
  return vp;
}

/// Voxels of mask that lie in region id.
inline Mask3D restrict(const Mask3D& mask, const VoronoiPartition& vp, std::uint32_t id) {
  require_same_grid(mask, vp.region);
  if (id < 1 || id > vp.n) throw std::out_of_range("invalid region id");
  Mask3D out(mask.dims(), mask.spacing());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (mask[i] && vp.region[i] == id) ? 1 : 0;
  return out;
}

}  // namespace ccm
