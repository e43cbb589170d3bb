#pragma once

// Standard segmentation metrics over a (prediction, reference) pair.
//
// Every metric is expressed as a kernel over sufficient statistics
// (OverlapCounts, SurfaceDistances) plus a mask-level wrapper. The CC
// protocol feeds the same kernels with per-region statistics, so a single
// region covering the volume reproduces the global value exactly.
//
// Empty-set policies:
//   both empty     -> perfect score (overlap 1, NSD 1, distances 0), defined
//   one side empty -> worst case (overlap/NSD 0, distances = image physical
//                     diagonal), defined = false

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccmetrics/edt.hpp"
#include "ccmetrics/volume.hpp"

namespace ccm {

struct MetricValue {
  double value = 0.0;
  bool defined = true;
  /// Empty when no substitution was applied.
  std::string policy;

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

namespace policy {
inline constexpr const char* kBothEmpty = "both_empty";
inline constexpr const char* kEmptyPrediction = "empty_prediction";
inline constexpr const char* kEmptyReference = "empty_reference";
inline constexpr const char* kNoTruePositives = "no_true_positives";
}  // namespace policy

/// Foreground voxels with at least one 6-neighbour that is background or
/// outside the grid.
struct SurfaceSet {
  std::vector<Index3> voxels;
  Spacing spacing;

  bool empty() const { return voxels.empty(); }
  std::size_t size() const { return voxels.size(); }
};

inline SurfaceSet extract_surface(const Mask3D& mask) {
  SurfaceSet out{{}, mask.spacing()};
  static constexpr std::array<Index3, 6> kFace{{{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                                {0, 1, 0},  {0, 0, -1}, {0, 0, 1}}};
  for_each_index(full_box(mask.dims()), [&](const Index3& i) {
    if (mask[i] == 0) return;
    for (const auto& o : kFace) {
      const Index3 n = i + o;
      if (!mask.in_bounds(n) || mask[n] == 0) {
        out.voxels.push_back(i);
        return;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Overlap family

struct OverlapCounts {
  std::uint64_t pred = 0;
  std::uint64_t ref = 0;
  std::uint64_t both = 0;
};

inline OverlapCounts overlap_counts(const Mask3D& pred, const Mask3D& ref) {
  require_same_grid(pred, ref);
  OverlapCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    c.pred += pred[i];
    c.ref += ref[i];
    c.both += pred[i] & ref[i];
  }
  return c;
}

namespace detail {
inline MetricValue empty_side(const OverlapCounts& c, double worst) {
  return {worst, false, c.pred == 0 ? policy::kEmptyPrediction : policy::kEmptyReference};
}
}  // namespace detail

inline MetricValue dice(const OverlapCounts& c) {
  if (c.pred == 0 && c.ref == 0) return {1.0, true, policy::kBothEmpty};
  if (c.pred == 0 || c.ref == 0) return detail::empty_side(c, 0.0);
  return {2.0 * static_cast<double>(c.both) / static_cast<double>(c.pred + c.ref), true, {}};
}

inline MetricValue iou(const OverlapCounts& c) {
  if (c.pred == 0 && c.ref == 0) return {1.0, true, policy::kBothEmpty};
  if (c.pred == 0 || c.ref == 0) return detail::empty_side(c, 0.0);
  return {static_cast<double>(c.both) / static_cast<double>(c.pred + c.ref - c.both), true, {}};
}

inline MetricValue dice(const Mask3D& pred, const Mask3D& ref) {
  return dice(overlap_counts(pred, ref));
}
inline MetricValue iou(const Mask3D& pred, const Mask3D& ref) {
  return iou(overlap_counts(pred, ref));
}

// ---------------------------------------------------------------------------
// Boundary and distance family

/// Directed nearest-surface distances in both directions.
struct SurfaceDistances {
  std::vector<double> pred_to_ref;
  std::vector<double> ref_to_pred;
  /// Worst-case distance substituted when exactly one surface is empty.
  double diagonal = 0.0;
  bool pred_empty = true;
  bool ref_empty = true;
};

inline SurfaceDistances surface_distances(const SurfaceSet& pred, const SurfaceSet& ref,
                                          double diagonal, unsigned threads = 1) {
  SurfaceDistances out{{}, {}, diagonal, pred.empty(), ref.empty()};
  if (pred.empty() || ref.empty()) return out;
  out.pred_to_ref = edt::squared_distances_to(pred.voxels, ref.voxels, pred.spacing, threads);
  out.ref_to_pred = edt::squared_distances_to(ref.voxels, pred.voxels, pred.spacing, threads);
  for (auto& v : out.pred_to_ref) v = std::sqrt(v);
  for (auto& v : out.ref_to_pred) v = std::sqrt(v);
  return out;
}

inline SurfaceDistances surface_distances(const Mask3D& pred, const Mask3D& ref,
                                          unsigned threads = 1) {
  require_same_grid(pred, ref);
  return surface_distances(extract_surface(pred), extract_surface(ref), ref.physical_diagonal(),
                           threads);
}

namespace detail {
inline MetricValue distance_empty_policy(const SurfaceDistances& d, bool& handled) {
  handled = true;
  const bool p = d.pred_empty;
  const bool r = d.ref_empty;
  if (p && r) return {0.0, true, policy::kBothEmpty};
  if (p) return {d.diagonal, false, policy::kEmptyPrediction};
  if (r) return {d.diagonal, false, policy::kEmptyReference};
  handled = false;
  return {};
}

inline std::vector<double> pooled(const SurfaceDistances& d) {
  std::vector<double> all;
  all.reserve(d.pred_to_ref.size() + d.ref_to_pred.size());
  all.insert(all.end(), d.pred_to_ref.begin(), d.pred_to_ref.end());
  all.insert(all.end(), d.ref_to_pred.begin(), d.ref_to_pred.end());
  return all;
}
}  // namespace detail

/// Linear interpolation between order statistics at rank q/100 * (n-1).
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = static_cast<std::size_t>(std::ceil(rank));
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

/// NSD: fraction of both surfaces lying within tau of the other surface.
inline MetricValue nsd(const SurfaceDistances& d, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("nsd tolerance must be >= 0");
  const bool p = d.pred_empty;
  const bool r = d.ref_empty;
  if (p && r) return {1.0, true, policy::kBothEmpty};
  if (p) return {0.0, false, policy::kEmptyPrediction};
  if (r) return {0.0, false, policy::kEmptyReference};
  auto within = [tau](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [tau](double x) { return x <= tau; }));
  };
  const auto hits = within(d.pred_to_ref) + within(d.ref_to_pred);
  const auto total = d.pred_to_ref.size() + d.ref_to_pred.size();
  return {static_cast<double>(hits) / static_cast<double>(total), true, {}};
}

/// Hausdorff distance at the given percentile of the pooled directed
/// distances; 100 gives the classic max-of-sups.
inline MetricValue hausdorff(const SurfaceDistances& d, double pct = 100.0) {
  if (!(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  bool handled = false;
  auto v = detail::distance_empty_policy(d, handled);
  if (handled) return v;
  auto all = detail::pooled(d);
  if (pct == 100.0) return {*std::max_element(all.begin(), all.end()), true, {}};
  return {percentile(std::move(all), pct), true, {}};
}

/// Average symmetric surface distance over the pooled directed distances.
inline MetricValue assd(const SurfaceDistances& d) {
  bool handled = false;
  auto v = detail::distance_empty_policy(d, handled);
  if (handled) return v;
  const auto all = detail::pooled(d);
  return {std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size()), true, {}};
}

inline double default_tau(const Spacing& spacing) { return spacing.max(); }

inline MetricValue nsd(const Mask3D& pred, const Mask3D& ref, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("nsd tolerance must be >= 0");
  return nsd(surface_distances(pred, ref), tau);
}
inline MetricValue hausdorff(const Mask3D& pred, const Mask3D& ref, double pct = 100.0) {
  if (!(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  return hausdorff(surface_distances(pred, ref), pct);
}
inline MetricValue assd(const Mask3D& pred, const Mask3D& ref) {
  return assd(surface_distances(pred, ref));
}

}  // namespace ccm
