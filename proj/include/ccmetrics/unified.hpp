#pragma once

// Unified recognition + segmentation baselines: Panoptic Quality and
// Lesion Dice, with their instance matching.

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ccmetrics/components.hpp"
#include "ccmetrics/metrics.hpp"

namespace ccm {

struct MatchPair {
  std::uint32_t pred = 0;
  std::uint32_t gt = 0;
  double iou = 0.0;
  std::uint64_t overlap = 0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<std::uint32_t> unmatched_predictions;   // FP
  std::vector<std::uint32_t> unmatched_ground_truth;  // FN
  /// Prediction ids assigned to more than one ground-truth component.
  std::vector<std::uint32_t> multi_assignments;
};

namespace detail {

// Voxel overlap per (pred id, gt id) pair with at least one shared voxel.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> overlap_table(
    const ComponentLabels& pred, const ComponentLabels& gt) {
  require_same_grid(pred.labels, gt.labels);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> table;
  for (std::size_t i = 0; i < pred.labels.size(); ++i) {
    const auto p = pred.labels[i];
    const auto g = gt.labels[i];
    if (p != 0 && g != 0) ++table[{p, g}];
  }
  return table;
}

inline double pair_iou(const ComponentLabels& pred, const ComponentLabels& gt, std::uint32_t p,
                       std::uint32_t g, std::uint64_t inter) {
  const auto a = pred.of(p).voxel_count;
  const auto b = gt.of(g).voxel_count;
  return static_cast<double>(inter) / static_cast<double>(a + b - inter);
}

inline void fill_unmatched(MatchResult& m, std::uint32_t n_pred, std::uint32_t n_gt) {
  std::vector<bool> pm(n_pred + 1, false), gm(n_gt + 1, false);
  for (const auto& pr : m.pairs) {
    pm[pr.pred] = true;
    gm[pr.gt] = true;
  }
  for (std::uint32_t p = 1; p <= n_pred; ++p)
    if (!pm[p]) m.unmatched_predictions.push_back(p);
  for (std::uint32_t g = 1; g <= n_gt; ++g)
    if (!gm[g]) m.unmatched_ground_truth.push_back(g);
}

}  // namespace detail

/// PQ matching: a pair is a TP iff IoU > 0.5, which makes the matching
/// one-to-one without any assignment step.
inline MatchResult match_pq(const ComponentLabels& pred, const ComponentLabels& gt) {
  MatchResult m;
  for (const auto& [key, inter] : detail::overlap_table(pred, gt)) {
    const double v = detail::pair_iou(pred, gt, key.first, key.second, inter);
    if (v > 0.5) m.pairs.push_back({key.first, key.second, v, inter});
  }
  detail::fill_unmatched(m, pred.n, gt.n);
  return m;
}

/// Lesion Dice matching: any shared voxel is a match, so one prediction may
/// be a TP for several ground-truth components.
inline MatchResult match_any_overlap(const ComponentLabels& pred, const ComponentLabels& gt) {
  MatchResult m;
  std::map<std::uint32_t, int> uses;
  for (const auto& [key, inter] : detail::overlap_table(pred, gt)) {
    m.pairs.push_back(
        {key.first, key.second, detail::pair_iou(pred, gt, key.first, key.second, inter), inter});
    ++uses[key.first];
  }
  for (const auto& [p, k] : uses)
    if (k > 1) m.multi_assignments.push_back(p);
  detail::fill_unmatched(m, pred.n, gt.n);
  return m;
}

inline MetricValue panoptic_quality(const MatchResult& m, std::uint32_t n_pred, std::uint32_t n_gt) {
  if (n_pred == 0 && n_gt == 0) return {1.0, true, policy::kBothEmpty};
  const double tp = static_cast<double>(m.pairs.size());
  if (m.pairs.empty()) return {0.0, false, policy::kNoTruePositives};
  double iou_sum = 0.0;
  for (const auto& pr : m.pairs) iou_sum += pr.iou;
  const double fp = static_cast<double>(m.unmatched_predictions.size());
  const double fn = static_cast<double>(m.unmatched_ground_truth.size());
  return {(iou_sum / tp) * (tp / (tp + 0.5 * fp + 0.5 * fn)), true, {}};
}

inline MetricValue panoptic_quality(const Mask3D& pred, const Mask3D& gt) {
  require_same_grid(pred, gt);
  const auto pl = label_components(pred);
  const auto gl = label_components(gt);
  return panoptic_quality(match_pq(pl, gl), pl.n, gl.n);
}

struct LesionDiceParams {
  /// cube26 radius-1 dilations of the ground truth used only to merge
  /// nearby instances before labeling.
  int gt_dilations = 0;
  /// Prediction components below this volume (1 ml = 1000 mm^3) are not
  /// counted as false positives.
  double min_volume_ml = 0.0;
};

struct LesionDiceResult {
  MetricValue value;
  MatchResult match;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// Ground-truth instances for Lesion Dice: components of the dilated mask,
/// with ids carried back onto the original ground-truth voxels.
inline ComponentLabels lesion_instances(const Mask3D& gt, int dilations) {
  if (dilations < 0) throw std::invalid_argument("gt_dilations must be >= 0");
  if (dilations == 0) return label_components(gt);
  Mask3D grown = gt;
  const StructuringElement cube{ElementKind::cube26, 1};
  for (int i = 0; i < dilations; ++i) grown = dilate(grown, cube);
  const auto merged = label_components(grown);
  ComponentLabels out{LabelVolume(gt.dims(), gt.spacing()), 0, {}};
  // Relabel densely: a dilated component always contains original voxels.
  std::vector<std::uint32_t> remap(merged.n + 1, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!gt[i]) continue;
    auto& r = remap[merged.labels[i]];
    if (r == 0) r = ++out.n;
    out.labels[i] = r;
  }
  out.stats.assign(out.n, ComponentStats{});
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto id = out.labels[i];
    if (id == 0) continue;
    auto& st = out.stats[id - 1];
    const auto idx = gt.index(i);
    if (st.voxel_count == 0) st.bbox = {idx, idx};
    ++st.voxel_count;
    st.bbox.include(idx);
  }
  for (auto& st : out.stats)
    st.physical_volume = static_cast<double>(st.voxel_count) * gt.spacing().voxel_volume();
  return out;
}

inline LesionDiceResult lesion_dice_detailed(const Mask3D& pred, const Mask3D& gt,
                                             const LesionDiceParams& params = {}) {
  require_same_grid(pred, gt);
  if (params.gt_dilations < 0 || !(params.min_volume_ml >= 0.0)) {
    throw std::invalid_argument("lesion dice parameters must be non-negative");
  }
  const auto pl = label_components(pred);
  const auto gl = lesion_instances(gt, params.gt_dilations);

  LesionDiceResult r;
  r.match = match_any_overlap(pl, gl);
  const double min_mm3 = params.min_volume_ml * 1000.0;
  for (auto p : r.match.unmatched_predictions)
    if (pl.of(p).physical_volume >= min_mm3) ++r.fp;
  r.fn = r.match.unmatched_ground_truth.size();
  if (pl.n == 0 && gl.n == 0) {
    r.value = {1.0, true, policy::kBothEmpty};
    return r;
  }

  // Per gt lesion: Dice against the union of all predictions assigned to it.
  // Prediction components are disjoint, so the union's size and overlap are
  // sums over the assigned pairs.
  std::vector<OverlapCounts> per_gt(gl.n + 1);
  for (const auto& pr : r.match.pairs) {
    per_gt[pr.gt].pred += pl.of(pr.pred).voxel_count;
    per_gt[pr.gt].both += pr.overlap;
  }
  double dice_sum = 0.0;
  for (std::uint32_t g = 1; g <= gl.n; ++g) {
    if (per_gt[g].pred == 0) continue;
    ++r.tp;
    per_gt[g].ref = gl.of(g).voxel_count;
    dice_sum += dice(per_gt[g]).value;
  }
  const double denom = static_cast<double>(r.tp + r.fp + r.fn);
  if (denom == 0.0) {
    // Only sub-threshold predictions and no ground truth.
    r.value = {1.0, true, policy::kBothEmpty};
  } else {
    r.value = {dice_sum / denom, true, {}};
  }
  return r;
}

inline MetricValue lesion_dice(const Mask3D& pred, const Mask3D& gt, const LesionDiceParams& params = {}) {
  return lesion_dice_detailed(pred, gt, params).value;
}

}  // namespace ccm
