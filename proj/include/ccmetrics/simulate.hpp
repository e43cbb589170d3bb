#pragma once

// Synthetic phantoms and degradation sweeps.
//
// A sweep starts from a perfect prediction (step 0 = ground truth) and
// applies one unit of a scenario's edit per step. Two families:
//
//   progressive  erode_all, erode_selected, dilate_selected, shift_selected
//                step k applies k erosions / dilations / +x voxel shifts to
//                every selected component
//   count        drop_n, insert_n_random, oversegment_n, undersegment_n
//                step k edits the first min(k, n) selected components once
//
// Edits are applied to each component's own sub-mask, so eroding one sphere
// never touches the others.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ccmetrics/cc_protocol.hpp"
#include "ccmetrics/components.hpp"
#include "ccmetrics/error.hpp"
#include "ccmetrics/metrics.hpp"
#include "ccmetrics/volume.hpp"

namespace ccm {

struct Sphere {
  Index3 center;
  /// Physical units.
  double radius = 0.0;
};

struct Phantom {
  Mask3D mask;
  std::vector<Sphere> spheres;
};

namespace detail {

// Voxel offsets within physical distance radius of the origin.
inline std::vector<Index3> ball_offsets(double radius, const Spacing& sp) {
  std::vector<Index3> out;
  const auto ra = static_cast<std::ptrdiff_t>(std::floor(radius / sp.x));
  const auto rb = static_cast<std::ptrdiff_t>(std::floor(radius / sp.y));
  const auto rc = static_cast<std::ptrdiff_t>(std::floor(radius / sp.z));
  const double r2 = radius * radius;
  for (std::ptrdiff_t a = -ra; a <= ra; ++a)
    for (std::ptrdiff_t b = -rb; b <= rb; ++b)
      for (std::ptrdiff_t c = -rc; c <= rc; ++c) {
        const double x = static_cast<double>(a) * sp.x;
        const double y = static_cast<double>(b) * sp.y;
        const double z = static_cast<double>(c) * sp.z;
        if (x * x + y * y + z * z <= r2) out.push_back({a, b, c});
      }
  return out;
}

inline bool touches_other(const LabelVolume& owner, const Index3& i, std::uint32_t self) {
  for (std::ptrdiff_t a = -1; a <= 1; ++a)
    for (std::ptrdiff_t b = -1; b <= 1; ++b)
      for (std::ptrdiff_t c = -1; c <= 1; ++c) {
        const Index3 n = i + Index3{a, b, c};
        if (!owner.in_bounds(n)) continue;
        const auto o = owner[n];
        if (o != 0 && o != self) return true;
      }
  return false;
}

}  // namespace detail

/// Rasterizes spheres as {voxel : |physical(voxel - center)| <= radius}.
/// Throws std::invalid_argument if a sphere leaves the grid or two spheres
/// overlap or are 26-adjacent.
inline Phantom make_phantom(const Dims& dims, const Spacing& spacing, std::vector<Sphere> spheres) {
  Phantom ph{Mask3D(dims, spacing), std::move(spheres)};
  LabelVolume owner(dims, spacing);
  for (std::size_t s = 0; s < ph.spheres.size(); ++s) {
    const auto& sph = ph.spheres[s];
    if (!(sph.radius >= 0.0) || !std::isfinite(sph.radius))
      throw std::invalid_argument("sphere radius must be finite and >= 0");
    const auto id = static_cast<std::uint32_t>(s + 1);
    for (const auto& o : detail::ball_offsets(sph.radius, spacing)) {
      const Index3 v = sph.center + o;
      if (!owner.in_bounds(v)) throw std::invalid_argument("sphere " + std::to_string(s) + " leaves the volume");
      if (owner[v] != 0) throw std::invalid_argument("spheres overlap");
      owner[v] = id;
    }
  }
  for_each_index(full_box(dims), [&](const Index3& i) {
    const auto id = owner[i];
    if (id == 0) return;
    if (detail::touches_other(owner, i, id)) throw std::invalid_argument("spheres are 26-adjacent");
    ph.mask[i] = 1;
  });
  return ph;
}

/// Three spheres of radii 20, 45 and 90 voxels along the long axis of a
/// 192 x 192 x 336 unit-spacing volume.
inline Phantom default_phantom() {
  return make_phantom({192, 192, 336}, {1.0, 1.0, 1.0},
                      {{{96, 96, 26}, 20.0}, {{96, 96, 97}, 45.0}, {{96, 96, 238}, 90.0}});
}

// ---------------------------------------------------------------------------
// Scenarios

enum class ScenarioKind {
  erode_all,
  erode_selected,
  dilate_selected,
  shift_selected,
  drop_n,
  insert_n_random,
  oversegment_n,
  undersegment_n,
};

enum class TargetRule { smallest, largest, all };

inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::erode_all: return "erode_all";
    case ScenarioKind::erode_selected: return "erode_selected";
    case ScenarioKind::dilate_selected: return "dilate_selected";
    case ScenarioKind::shift_selected: return "shift_selected";
    case ScenarioKind::drop_n: return "drop_n";
    case ScenarioKind::insert_n_random: return "insert_n_random";
    case ScenarioKind::oversegment_n: return "oversegment_n";
    case ScenarioKind::undersegment_n: return "undersegment_n";
  }
  return "?";
}

inline ScenarioKind scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::erode_all, ScenarioKind::erode_selected, ScenarioKind::dilate_selected,
                 ScenarioKind::shift_selected, ScenarioKind::drop_n, ScenarioKind::insert_n_random,
                 ScenarioKind::oversegment_n, ScenarioKind::undersegment_n})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown scenario: " + s);
}

inline std::string to_string(TargetRule t) {
  switch (t) {
    case TargetRule::smallest: return "smallest";
    case TargetRule::largest: return "largest";
    case TargetRule::all: return "all";
  }
  return "?";
}

inline TargetRule target_from_string(const std::string& s) {
  if (s == "smallest") return TargetRule::smallest;
  if (s == "largest") return TargetRule::largest;
  if (s == "all") return TargetRule::all;
  throw std::invalid_argument("unknown target rule: " + s);
}

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::erode_all;
  TargetRule target = TargetRule::all;
  std::size_t n = 1;
  std::size_t steps = 1;
  std::uint64_t seed = 0;
  /// Inserted sphere volume as a percentile of ground-truth component volumes.
  double insert_volume_percentile = 25.0;
  StructuringElement element{};
};

inline bool is_count_scenario(ScenarioKind k) {
  return k == ScenarioKind::drop_n || k == ScenarioKind::insert_n_random ||
         k == ScenarioKind::oversegment_n || k == ScenarioKind::undersegment_n;
}

struct SweepResult {
  ScenarioConfig config;
  /// steps[0] is the unedited prediction.
  std::vector<SuiteResult> steps;
  /// Predictions per step, only when requested.
  std::vector<Mask3D> predictions;
};

// ---------------------------------------------------------------------------
// Deterministic randomness

/// std::mt19937_64 is fully specified by the standard; the bounded draw is
/// done here rather than with a std distribution, whose algorithm is
/// implementation-defined.
class SweepRng {
 public:
  explicit SweepRng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL))) {}

  /// Uniform in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

// A component's evolving sub-mask in a local box.
struct ComponentState {
  Box box;
  Mask3D local;
};

inline ComponentState component_state(const ComponentLabels& cl, std::uint32_t id, std::ptrdiff_t margin) {
  const Box box = intersect(cl.of(id).bbox.grown(margin), full_box(cl.dims()));
  ComponentState st{box, Mask3D(box.dims(), cl.spacing())};
  for_each_index(box, [&](const Index3& i) { st.local[i - box.lo] = cl.labels[i] == id ? 1 : 0; });
  return st;
}

inline std::vector<std::uint32_t> selected_ids(const ComponentLabels& cl, const ScenarioConfig& cfg) {
  const bool all = cfg.target == TargetRule::all || cfg.scenario == ScenarioKind::erode_all;
  if (all) {
    std::vector<std::uint32_t> ids(cl.n);
    for (std::uint32_t i = 0; i < cl.n; ++i) ids[i] = i + 1;
    if (is_count_scenario(cfg.scenario)) ids.resize(std::min<std::size_t>(cfg.n, ids.size()));
    return ids;
  }
  return select_components(cl, cfg.target == TargetRule::smallest ? SelectionRule::n_smallest
                                                                  : SelectionRule::n_largest,
                           cfg.n);
}

inline void check_preconditions(const ComponentLabels& cl, const ScenarioConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (cl.n == 0) throw ScenarioPrecondition("ground truth has no components");
  const bool uses_n = cfg.scenario != ScenarioKind::erode_all && cfg.target != TargetRule::all;
  if (cfg.scenario == ScenarioKind::drop_n && cl.n < cfg.n + 1) {
    throw ScenarioPrecondition("drop_n needs at least n+1 components (have " + std::to_string(cl.n) +
                               ", n = " + std::to_string(cfg.n) + ")");
  }
  if ((uses_n || is_count_scenario(cfg.scenario)) && cfg.n > cl.n) {
    throw ScenarioPrecondition("scenario needs at least n components (have " + std::to_string(cl.n) +
                               ", n = " + std::to_string(cfg.n) + ")");
  }
  if (!(cfg.insert_volume_percentile >= 0.0 && cfg.insert_volume_percentile <= 100.0))
    throw std::invalid_argument("insert volume percentile must be in [0, 100]");
}

// One inserted sphere per selected region, drawn up front so step k is
// step k-1 plus one sphere.
inline std::vector<std::vector<Index3>> plan_insertions(const CCEvaluator& ev,
                                                        std::span<const std::uint32_t> regions,
                                                        const ScenarioConfig& cfg, SweepRng& rng) {
  const auto& cl = ev.components();
  const auto& gt = ev.ground_truth();
  const auto& vp = ev.partition();
  std::vector<double> volumes;
  for (const auto& st : cl.stats) volumes.push_back(st.physical_volume);
  const double target_volume = percentile(volumes, cfg.insert_volume_percentile);
  const double radius = std::cbrt(3.0 * target_volume / (4.0 * std::numbers::pi));
  const auto offsets = ball_offsets(radius, gt.spacing());

  LabelVolume occupied(gt.dims(), gt.spacing());
  for (std::size_t i = 0; i < gt.size(); ++i) occupied[i] = gt[i] ? 1u : 0u;

  std::vector<std::vector<Index3>> stamps;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const std::uint32_t region = regions[k];
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < gt.size(); ++i)
      if (vp.region[i] == region && occupied[i] == 0) candidates.push_back(i);
    if (candidates.empty()) throw ScenarioPrecondition("no free voxel in region " + std::to_string(region));

    const auto stamp_id = static_cast<std::uint32_t>(k + 2);
    std::optional<std::vector<Index3>> accepted;
    for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
      const Index3 center = gt.index(candidates[rng.below(candidates.size())]);
      std::vector<Index3> stamp;
      bool clean = true;
      for (const auto& o : offsets) {
        const Index3 v = center + o;
        if (!gt.in_bounds(v) || vp.region[v] != region) continue;
        if (occupied[v] != 0 || touches_other(occupied, v, stamp_id)) {
          clean = false;
          break;
        }
        stamp.push_back(v);
      }
      if (!clean || stamp.empty()) continue;
      // The clipped sphere must stay a single 26-connected piece.
      Box bb{stamp.front(), stamp.front()};
      for (const auto& v : stamp) bb.include(v);
      Mask3D local(bb.dims(), gt.spacing());
      for (const auto& v : stamp) local[v - bb.lo] = 1;
      if (label_components(local).n != 1) continue;
      accepted = std::move(stamp);
    }
    if (!accepted)
      throw ScenarioPrecondition("could not place an inserted component in region " + std::to_string(region));
    for (const auto& v : *accepted) occupied[v] = stamp_id;
    stamps.push_back(std::move(*accepted));
  }
  return stamps;
}

}  // namespace detail

struct SweepOptions {
  unsigned threads = 1;
  /// Stream index for the RNG, e.g. a patient index in a dataset sweep.
  std::uint64_t stream = 0;
  bool keep_predictions = false;
};

inline SweepResult run_sweep(const CCEvaluator& ev, const ScenarioConfig& cfg,
                             std::span<const MetricSpec> suite, const SweepOptions& opt = {}) {
  const auto& cl = ev.components();
  const auto& gt = ev.ground_truth();
  detail::check_preconditions(cl, cfg);
  const auto ids = detail::selected_ids(cl, cfg);
  const auto kind = cfg.scenario;
  const bool count = is_count_scenario(kind);
  const std::ptrdiff_t r = cfg.element.radius;

  SweepResult out{cfg, {}, {}};
  auto record = [&](Mask3D pred) {
    out.steps.push_back(ev.evaluate(pred, suite));
    if (opt.keep_predictions) out.predictions.push_back(std::move(pred));
  };

  // Mask with the given components removed.
  auto without = [&](std::span<const std::uint32_t> drop) {
    std::vector<bool> gone(cl.n + 1, false);
    for (auto id : drop) gone[id] = true;
    Mask3D m(gt.dims(), gt.spacing());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto l = cl.labels[i];
      m[i] = (l != 0 && !gone[l]) ? 1 : 0;
    }
    return m;
  };

  record(gt);

  std::vector<std::vector<Index3>> stamps;
  if (kind == ScenarioKind::insert_n_random) {
    SweepRng rng(cfg.seed, opt.stream);
    stamps = detail::plan_insertions(ev, ids, cfg, rng);
  }

  // Progressive edits carry per-component state from step to step.
  std::vector<detail::ComponentState> states;
  if (!count) {
    const std::ptrdiff_t margin =
        kind == ScenarioKind::dilate_selected ? r * static_cast<std::ptrdiff_t>(cfg.steps) : 0;
    for (auto id : ids) states.push_back(detail::component_state(cl, id, margin));
  }

  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    if (!count) {
      Mask3D pred = without(ids);
      for (std::size_t s = 0; s < ids.size(); ++s) {
        auto& st = states[s];
        Index3 offset = st.box.lo;
        if (kind == ScenarioKind::erode_all || kind == ScenarioKind::erode_selected) {
          st.local = erode(st.local, cfg.element);
        } else if (kind == ScenarioKind::dilate_selected) {
          st.local = dilate(st.local, cfg.element);
        } else {
          offset = offset + Index3{static_cast<std::ptrdiff_t>(k), 0, 0};
        }
        paste_nonzero(pred, st.local, offset, std::uint8_t{1});
      }
      record(std::move(pred));
      continue;
    }

    const std::size_t m = std::min(k, ids.size());
    const std::span<const std::uint32_t> edited(ids.data(), m);
    if (kind == ScenarioKind::drop_n) {
      record(without(edited));
    } else if (kind == ScenarioKind::insert_n_random) {
      Mask3D pred = gt;
      for (std::size_t s = 0; s < m; ++s)
        for (const auto& v : stamps[s]) pred[v] = 1;
      record(std::move(pred));
    } else {
      Mask3D pred = without(edited);
      const bool grow = kind == ScenarioKind::oversegment_n;
      for (auto id : edited) {
        auto st = detail::component_state(cl, id, grow ? r : 0);
        st.local = grow ? dilate(st.local, cfg.element) : erode(st.local, cfg.element);
        paste_nonzero(pred, st.local, st.box.lo, std::uint8_t{1});
      }
      record(std::move(pred));
    }
  }
  return out;
}

inline SweepResult run_sweep(const Mask3D& gt, const ScenarioConfig& cfg, std::span<const MetricSpec> suite,
                             const SweepOptions& opt = {}) {
  const CCEvaluator ev(gt, opt.threads);
  return run_sweep(ev, cfg, suite, opt);
}

}  // namespace ccm
