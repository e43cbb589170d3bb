#pragma once

// CC-Metrics: evaluate a metric separately inside each generalized Voronoi
// region of the ground truth and average the per-region scores uniformly.
//
// CCEvaluator owns the ground-truth labeling and partition so repeated
// evaluations (metric suites, degradation sweeps) build them once.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccmetrics/components.hpp"
#include "ccmetrics/metrics.hpp"
#include "ccmetrics/parallel.hpp"
#include "ccmetrics/unified.hpp"
#include "ccmetrics/voronoi.hpp"

namespace ccm {

enum class MetricKind { dice, iou, nsd, hausdorff, assd, panoptic_quality, lesion_dice };

struct MetricSpec {
  MetricKind kind = MetricKind::dice;
  /// Report name, e.g. "hd95".
  std::string name = "dice";
  /// NSD tolerance in physical units; unset means max(spacing).
  std::optional<double> tau;
  /// Hausdorff percentile in (0, 100].
  double percentile = 100.0;
  LesionDiceParams lesion;

  /// Metrics that are evaluated per Voronoi region.
  bool regional() const {
    return kind != MetricKind::panoptic_quality && kind != MetricKind::lesion_dice;
  }
  bool uses_surfaces() const {
    return kind == MetricKind::nsd || kind == MetricKind::hausdorff || kind == MetricKind::assd;
  }
};

/// Known names: dice, iou, nsd, hd, hd95, assd, pq, lesion-dice.
/// `percentile` applies to "hd" only; "hd95" is always the 95th.
inline MetricSpec parse_metric(const std::string& name, std::optional<double> tau = std::nullopt,
                               double percentile = 100.0, LesionDiceParams lesion = {}) {
  MetricSpec m;
  m.name = name;
  if (name == "dice") {
    m.kind = MetricKind::dice;
  } else if (name == "iou") {
    m.kind = MetricKind::iou;
  } else if (name == "nsd") {
    m.kind = MetricKind::nsd;
    if (tau && !(*tau >= 0.0)) throw std::invalid_argument("--tau must be >= 0");
    m.tau = tau;
  } else if (name == "hd") {
    m.kind = MetricKind::hausdorff;
    if (!(percentile > 0.0 && percentile <= 100.0))
      throw std::invalid_argument("--percentile must be in (0, 100]");
    m.percentile = percentile;
  } else if (name == "hd95") {
    m.kind = MetricKind::hausdorff;
    m.percentile = 95.0;
  } else if (name == "assd") {
    m.kind = MetricKind::assd;
  } else if (name == "pq") {
    m.kind = MetricKind::panoptic_quality;
  } else if (name == "lesion-dice") {
    m.kind = MetricKind::lesion_dice;
    if (lesion.gt_dilations < 0 || !(lesion.min_volume_ml >= 0.0))
      throw std::invalid_argument("lesion dice parameters must be non-negative");
    m.lesion = lesion;
  } else {
    throw std::invalid_argument("unknown metric: " + name);
  }
  return m;
}

struct RegionScore {
  std::uint32_t id = 0;
  MetricValue value;
};

struct CCReport {
  MetricSpec metric;
  /// One entry per ground-truth component, in id order. Empty for
  /// non-regional metrics and when the ground truth is empty.
  std::vector<RegionScore> per_region;
  /// Unweighted mean of per_region; unset when CC evaluation is undefined
  /// (empty ground truth) or the metric is not regional.
  std::optional<double> aggregate;
  /// The same metric on the unrestricted masks.
  MetricValue global_baseline;
  std::size_t undefined_region_count = 0;
  std::uint32_t n_components = 0;
  /// NSD tolerance actually used, when applicable.
  std::optional<double> tau_used;
};

struct SuiteResult {
  std::uint32_t n_components = 0;
  bool cc_defined = false;
  std::vector<CCReport> reports;
};

/// Per-region sufficient statistics for one prediction.
struct RegionDecomposition {
  /// Index 0 is the whole volume; index r is region r.
  std::vector<OverlapCounts> counts;
  std::vector<SurfaceSet> pred_surfaces;
  std::vector<SurfaceSet> ref_surfaces;
};

namespace detail {

// Foreground voxels of `mask` within their region whose 6-neighbour is
// outside the grid, background, or in another region. With region == null
// the whole volume is one region.
inline void collect_surfaces(const Mask3D& mask, const LabelVolume* region, std::uint32_t n,
                             std::vector<SurfaceSet>& out) {
  out.assign(n + 1, SurfaceSet{{}, mask.spacing()});
  static constexpr std::array<Index3, 6> kFace{{{-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                                {0, 1, 0},  {0, 0, -1}, {0, 0, 1}}};
  for_each_index(full_box(mask.dims()), [&](const Index3& i) {
    const std::size_t li = mask.linear(i);
    if (mask[li] == 0) return;
    const std::uint32_t r = region ? (*region)[li] : 0;
    for (const auto& o : kFace) {
      const Index3 nb = i + o;
      if (!mask.in_bounds(nb)) {
        out[r].voxels.push_back(i);
        return;
      }
      const std::size_t ln = mask.linear(nb);
      if (mask[ln] == 0 || (region && (*region)[ln] != r)) {
        out[r].voxels.push_back(i);
        return;
      }
    }
  });
}

inline MetricValue regional_value(const MetricSpec& m, const OverlapCounts& counts,
                                  const SurfaceDistances* dist, double tau) {
  switch (m.kind) {
    case MetricKind::dice: return dice(counts);
    case MetricKind::iou: return iou(counts);
    case MetricKind::nsd: return nsd(*dist, tau);
    case MetricKind::hausdorff: return hausdorff(*dist, m.percentile);
    case MetricKind::assd: return assd(*dist);
    default: throw std::logic_error("metric is not regional");
  }
}

}  // namespace detail

class CCEvaluator {
 public:
  explicit CCEvaluator(Mask3D gt, unsigned threads = 1)
      : gt_(std::move(gt)), threads_(threads), labels_(label_components(gt_)) {
    if (labels_.n > 0) partition_ = build_partition(labels_, threads_);
  }

  const Mask3D& ground_truth() const { return gt_; }
  const ComponentLabels& components() const { return labels_; }
  bool cc_defined() const { return partition_.has_value(); }
  const VoronoiPartition& partition() const {
    if (!partition_) throw EmptyGroundTruth();
    return *partition_;
  }

  RegionDecomposition decompose(const Mask3D& pred, bool with_surfaces) const {
    require_same_grid(pred, gt_);
    const std::uint32_t n = labels_.n;
    RegionDecomposition d;
    d.counts.assign(n + 1, OverlapCounts{});
    auto add = [](OverlapCounts& c, std::uint8_t p, std::uint8_t s) {
      c.pred += p;
      c.ref += s;
      c.both += p & s;
    };
    for (std::size_t i = 0; i < pred.size(); ++i) {
      add(d.counts[0], pred[i], gt_[i]);
      if (partition_) add(d.counts[partition_->region[i]], pred[i], gt_[i]);
    }
    if (with_surfaces) {
      std::vector<SurfaceSet> global_p, global_s;
      detail::collect_surfaces(pred, nullptr, 0, global_p);
      detail::collect_surfaces(gt_, nullptr, 0, global_s);
      if (partition_) {
        detail::collect_surfaces(pred, &partition_->region, n, d.pred_surfaces);
        detail::collect_surfaces(gt_, &partition_->region, n, d.ref_surfaces);
      } else {
        d.pred_surfaces.assign(1, SurfaceSet{{}, pred.spacing()});
        d.ref_surfaces.assign(1, SurfaceSet{{}, pred.spacing()});
      }
      d.pred_surfaces[0] = std::move(global_p[0]);
      d.ref_surfaces[0] = std::move(global_s[0]);
    }
    return d;
  }

  SuiteResult evaluate(const Mask3D& pred, std::span<const MetricSpec> suite) const {
    require_same_grid(pred, gt_);
    const std::uint32_t n = labels_.n;
    bool surfaces = false;
    for (const auto& m : suite) surfaces = surfaces || m.uses_surfaces();
    const auto dec = decompose(pred, surfaces);

    // Directed surface distances per region (index 0 = global).
    const std::size_t slots = cc_defined() ? n + 1 : 1;
    std::vector<SurfaceDistances> dist(surfaces ? slots : 0);
    if (surfaces) {
      const double diag = gt_.physical_diagonal();
      parallel_for(slots, threads_, [&](std::size_t r) {
        dist[r] = surface_distances(dec.pred_surfaces[r], dec.ref_surfaces[r], diag, 1);
      });
    }

    std::optional<ComponentLabels> pred_labels;
    SuiteResult out{n, cc_defined(), {}};
    for (const auto& m : suite) {
      CCReport rep;
      rep.metric = m;
      rep.n_components = n;
      if (m.regional()) {
        const double tau = m.tau.value_or(default_tau(gt_.spacing()));
        if (m.kind == MetricKind::nsd) rep.tau_used = tau;
        rep.global_baseline =
            detail::regional_value(m, dec.counts[0], surfaces ? &dist[0] : nullptr, tau);
        if (cc_defined()) {
          double sum = 0.0;
          for (std::uint32_t r = 1; r <= n; ++r) {
            auto v = detail::regional_value(m, dec.counts[r], surfaces ? &dist[r] : nullptr, tau);
            if (!v.defined) ++rep.undefined_region_count;
            sum += v.value;
            rep.per_region.push_back({r, std::move(v)});
          }
          rep.aggregate = sum / static_cast<double>(n);
        }
      } else if (m.kind == MetricKind::panoptic_quality) {
        if (!pred_labels) pred_labels = label_components(pred);
        rep.global_baseline = panoptic_quality(match_pq(*pred_labels, labels_), pred_labels->n, n);
      } else {
        rep.global_baseline = lesion_dice(pred, gt_, m.lesion);
      }
      out.reports.push_back(std::move(rep));
    }
    return out;
  }

  /// Single-metric CC evaluation; throws EmptyGroundTruth without sites.
  CCReport evaluate_cc(const Mask3D& pred, const MetricSpec& metric) const {
    if (!cc_defined()) throw EmptyGroundTruth();
    if (!metric.regional()) throw std::invalid_argument(metric.name + " is not a regional metric");
    const MetricSpec one[] = {metric};
    return std::move(evaluate(pred, one).reports.front());
  }

 private:
  Mask3D gt_;
  unsigned threads_;
  ComponentLabels labels_;
  std::optional<VoronoiPartition> partition_;
};

inline CCReport evaluate_cc(const Mask3D& pred, const Mask3D& gt, const MetricSpec& metric,
                            unsigned threads = 1) {
  require_same_grid(pred, gt);
  return CCEvaluator(gt, threads).evaluate_cc(pred, metric);
}

/// Components and partition are built once and shared by all metrics. An
/// empty ground truth yields global and unified values only.
inline SuiteResult evaluate_suite(const Mask3D& pred, const Mask3D& gt,
                                  std::span<const MetricSpec> suite, unsigned threads = 1) {
  require_same_grid(pred, gt);
  return CCEvaluator(gt, threads).evaluate(pred, suite);
}

}  // namespace ccm
