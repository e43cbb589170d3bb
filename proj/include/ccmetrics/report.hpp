#pragma once

// Report serialization: per-evaluation JSON and CSV, and the sweep CSV.
// Numbers are written in shortest round-trip form so output is a pure
// function of the values.

#include <charconv>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "ccmetrics/cc_protocol.hpp"
#include "ccmetrics/simulate.hpp"

namespace ccm::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kEvalCsvHeader = "metric,region,value,defined,policy";
inline constexpr const char* kSweepCsvHeader = "step,scenario,metric,aggregate_cc,global,n_components,seed";

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline Json metric_params(const CCReport& r) {
  Json j = Json::object();
  const auto& m = r.metric;
  if (m.kind == MetricKind::nsd && r.tau_used) j["tau"] = *r.tau_used;
  if (m.kind == MetricKind::hausdorff) {
    j["percentile"] = m.percentile;
    j["hd_pooling"] = "pooled";
  }
  if (m.kind == MetricKind::lesion_dice) {
    j["ld_dilations"] = m.lesion.gt_dilations;
    j["ld_min_ml"] = m.lesion.min_volume_ml;
    j["ld_dice_convention"] = "union_of_assigned_predictions";
  }
  return j;
}

inline Json to_json(const CCReport& r) {
  Json j;
  j["metric"] = r.metric.name;
  const Json params = metric_params(r);
  for (const auto& [k, v] : params.items()) j[k] = v;
  Json regions = Json::array();
  for (const auto& rs : r.per_region) {
    regions.push_back({{"id", rs.id},
                       {"value", rs.value.value},
                       {"defined", rs.value.defined},
                       {"policy", rs.value.policy}});
  }
  j["regions"] = std::move(regions);
  j["aggregate"] = r.aggregate ? Json(*r.aggregate) : Json(nullptr);
  j["global"] = r.global_baseline.value;
  j["global_defined"] = r.global_baseline.defined;
  j["global_policy"] = r.global_baseline.policy;
  j["n_components"] = r.n_components;
  j["undefined_regions"] = r.undefined_region_count;
  return j;
}

inline Json to_json(const SuiteResult& s, const Json& manifest) {
  Json j;
  j["manifest"] = manifest;
  j["n_components"] = s.n_components;
  j["cc_defined"] = s.cc_defined;
  if (!s.cc_defined) j["cc_note"] = "ground truth has no foreground; CC-Metrics undefined";
  Json reports = Json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  j["reports"] = std::move(reports);
  return j;
}

/// One row per region, then an aggregate row (regional metrics) and a
/// global row per metric.
inline void write_eval_csv(std::ostream& os, const SuiteResult& s) {
  os << kEvalCsvHeader << '\n';
  for (const auto& r : s.reports) {
    for (const auto& rs : r.per_region) {
      os << r.metric.name << ',' << rs.id << ',' << format_number(rs.value.value) << ','
         << (rs.value.defined ? "true" : "false") << ',' << rs.value.policy << '\n';
    }
    if (r.metric.regional()) {
      if (r.aggregate) {
        os << r.metric.name << ",aggregate," << format_number(*r.aggregate) << ",true,\n";
      } else {
        os << r.metric.name << ",aggregate,,false,empty_ground_truth\n";
      }
    }
    os << r.metric.name << ",global," << format_number(r.global_baseline.value) << ','
       << (r.global_baseline.defined ? "true" : "false") << ',' << r.global_baseline.policy << '\n';
  }
}

inline void write_sweep_header(std::ostream& os) { os << kSweepCsvHeader << '\n'; }

/// aggregate_cc is left empty for non-regional metrics.
inline void write_sweep_rows(std::ostream& os, const SweepResult& sweep) {
  const std::string scenario = to_string(sweep.config.scenario);
  for (std::size_t k = 0; k < sweep.steps.size(); ++k) {
    const auto& step = sweep.steps[k];
    for (const auto& r : step.reports) {
      os << k << ',' << scenario << ',' << r.metric.name << ','
         << (r.aggregate ? format_number(*r.aggregate) : std::string()) << ','
         << format_number(r.global_baseline.value) << ',' << r.n_components << ','
         << sweep.config.seed << '\n';
    }
  }
}

}  // namespace ccm::report
