#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ccmetrics/report.hpp"
#include "ccmetrics/simulate.hpp"

using namespace ccm;

namespace {

Phantom small_phantom() {
  return make_phantom({16, 16, 48}, {1, 1, 1},
                      {{{8, 8, 5}, 3.0}, {{8, 8, 17}, 5.0}, {{8, 8, 34}, 7.0}});
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Report, NumbersRoundTrip) {
  for (double v : {0.0, 1.0, 2.0 / 3.0, 1e-300, 123456.789, std::sqrt(2.0)})
    EXPECT_EQ(std::stod(report::format_number(v)), v);
  EXPECT_EQ(report::format_number(1.0), "1");
  EXPECT_EQ(report::format_number(0.5), "0.5");
}

TEST(Report, EvalCsvRows) {
  const auto ph = small_phantom();
  const auto cl = label_components(ph.mask);
  const auto pred = logical_andnot(ph.mask, component_mask(cl, 1));
  const std::vector<MetricSpec> suite{parse_metric("dice"), parse_metric("pq")};
  std::ostringstream os;
  report::write_eval_csv(os, evaluate_suite(pred, ph.mask, suite));
  const auto l = lines(os.str());
  ASSERT_EQ(l.size(), 1u + 3u + 2u + 1u);
  EXPECT_EQ(l[0], "metric,region,value,defined,policy");
  EXPECT_EQ(l[1], "dice,1,0,false,empty_prediction");
  EXPECT_EQ(l[2], "dice,2,1,true,");
  EXPECT_EQ(l[4], "dice,aggregate," + report::format_number(2.0 / 3.0) + ",true,");
  EXPECT_EQ(l[5].rfind("dice,global,", 0), 0u);
  EXPECT_EQ(l[6], "pq,global,0.8,true,");
}

TEST(Report, EvalCsvEmptyGroundTruth) {
  const Mask3D gt({3, 3, 3}, {1, 1, 1});
  const std::vector<MetricSpec> suite{parse_metric("dice")};
  std::ostringstream os;
  report::write_eval_csv(os, evaluate_suite(gt, gt, suite));
  const auto l = lines(os.str());
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[1], "dice,aggregate,,false,empty_ground_truth");
  EXPECT_EQ(l[2], "dice,global,1,true,both_empty");
}

TEST(Report, JsonSchema) {
  const auto ph = small_phantom();
  const std::vector<MetricSpec> suite{parse_metric("nsd"), parse_metric("hd95"), parse_metric("lesion-dice")};
  const auto j = report::to_json(evaluate_suite(erode(ph.mask), ph.mask, suite), {{"tool", "x"}});
  EXPECT_EQ(j["manifest"]["tool"], "x");
  EXPECT_EQ(j["n_components"], 3);
  EXPECT_EQ(j["cc_defined"], true);
  ASSERT_EQ(j["reports"].size(), 3u);
  const auto& nsd = j["reports"][0];
  EXPECT_EQ(nsd["metric"], "nsd");
  EXPECT_EQ(nsd["tau"], 1.0);
  EXPECT_EQ(nsd["regions"].size(), 3u);
  EXPECT_EQ(nsd["regions"][0]["id"], 1);
  EXPECT_TRUE(nsd["aggregate"].is_number());
  EXPECT_EQ(j["reports"][1]["percentile"], 95.0);
  EXPECT_EQ(j["reports"][1]["hd_pooling"], "pooled");
  EXPECT_TRUE(j["reports"][2]["aggregate"].is_null());
  EXPECT_EQ(j["reports"][2]["ld_dilations"], 0);
}

TEST(Report, SweepCsv) {
  const auto ph = small_phantom();
  const std::vector<MetricSpec> suite{parse_metric("dice"), parse_metric("pq")};
  ScenarioConfig cfg{ScenarioKind::drop_n, TargetRule::smallest, 1, 1, 7, 25.0, {}};
  std::ostringstream os;
  report::write_sweep_header(os);
  report::write_sweep_rows(os, run_sweep(ph.mask, cfg, suite));
  const auto l = lines(os.str());
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "step,scenario,metric,aggregate_cc,global,n_components,seed");
  EXPECT_EQ(l[1], "0,drop_n,dice,1,1,3,7");
  EXPECT_EQ(l[2], "0,drop_n,pq,,1,3,7");
  EXPECT_EQ(l[3].rfind("1,drop_n,dice," + report::format_number(2.0 / 3.0) + ",", 0), 0u);
  EXPECT_EQ(l[4], "1,drop_n,pq,,0.8,3,7");
}
