// ccmetrics command-line front end.
//
//   ccmetrics eval      --gt G --pred P --out PREFIX   -> PREFIX.json, PREFIX.csv
//   ccmetrics partition --gt G --out L.ccm              -> dtype-1 region labels
//   ccmetrics simulate  (--gt G... | --phantom) --out S.csv --scenario NAME
//   ccmetrics phantom   --out P.ccm                     -> default phantom mask
//
// Exit codes: 0 success, 2 input validation, 3 internal error.

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "ccmetrics/ccmetrics.hpp"
#include "ccmetrics/report.hpp"

#ifndef CCMETRICS_VERSION
#define CCMETRICS_VERSION "0.0.0"
#endif

namespace {

using ccm::report::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::vector<std::string> gt;
  std::string pred;
  std::string out;
  std::string metrics;
  std::optional<double> tau;
  double percentile = 100.0;
  std::string elem = "cross6";
  int ld_dilations = 0;
  double ld_min_ml = 0.0;
  std::uint64_t seed = 0;
  std::string scenario = "erode_all";
  std::size_t steps = 1;
  std::size_t n = 1;
  std::string target = "all";
  bool phantom = false;
  unsigned threads = 0;
};

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ccm::InputError("cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex += kHex[md[i] >> 4];
    hex += kHex[md[i] & 15];
  }
  return hex;
}

// SOURCE_DATE_EPOCH pins the timestamp for reproducible builds of reports.
std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::stoll(env));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Thread count is deliberately absent: it never changes the output.
Json manifest(const std::string& command, const Json& params, const std::vector<std::string>& inputs) {
  Json m;
  m["tool"] = "ccmetrics";
  m["version"] = CCMETRICS_VERSION;
  m["command"] = command;
  m["params"] = params;
  Json in = Json::array();
  for (const auto& p : inputs) in.push_back({{"path", p}, {"sha256", sha256_file(p)}});
  m["inputs"] = std::move(in);
  m["policies"] = {{"empty_both", "perfect score, defined"},
                   {"empty_one_side", "worst case (0 or image physical diagonal), undefined"},
                   {"pq_no_true_positives", "0, undefined"},
                   {"empty_ground_truth", "CC metrics undefined, global metrics reported"},
                   {"voronoi_ties", "smallest component id"}};
  m["timestamp"] = timestamp();
  return m;
}

std::vector<ccm::MetricSpec> parse_suite(const Options& o, const std::string& fallback) {
  const std::string list = o.metrics.empty() ? fallback : o.metrics;
  std::vector<ccm::MetricSpec> suite;
  std::stringstream ss(list);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    suite.push_back(ccm::parse_metric(name, o.tau, o.percentile, {o.ld_dilations, o.ld_min_ml}));
  }
  if (suite.empty()) throw std::invalid_argument("--metrics is empty");
  return suite;
}

Json metric_params(const Options& o, const std::vector<ccm::MetricSpec>& suite) {
  Json names = Json::array();
  for (const auto& m : suite) names.push_back(m.name);
  Json p;
  p["metrics"] = std::move(names);
  p["tau"] = o.tau ? Json(*o.tau) : Json("max_spacing");
  p["percentile"] = o.percentile;
  p["elem"] = o.elem;
  p["ld_dilations"] = o.ld_dilations;
  p["ld_min_ml"] = o.ld_min_ml;
  return p;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ccm::InputError("cannot open " + path + " for writing");
  return os;
}

int cmd_eval(const Options& o) {
  if (o.gt.size() != 1) throw std::invalid_argument("eval takes exactly one --gt");
  const auto suite = parse_suite(o, "dice,iou,nsd,hd95,assd,pq,lesion-dice");
  const auto gt = ccm::io::read_mask_file(o.gt[0]);
  const auto pred = ccm::io::read_mask_file(o.pred);
  ccm::require_same_grid(pred, gt);
  const auto result = ccm::evaluate_suite(pred, gt, suite, o.threads);

  const auto man = manifest("eval", metric_params(o, suite), {o.gt[0], o.pred});
  {
    auto os = open_out(o.out + ".json");
    os << ccm::report::to_json(result, man).dump(2) << '\n';
  }
  {
    auto os = open_out(o.out + ".csv");
    ccm::report::write_eval_csv(os, result);
  }
  if (!result.cc_defined)
    std::cerr << "note: ground truth has no foreground; CC metrics reported as undefined\n";
  return kExitOk;
}

int cmd_partition(const Options& o) {
  if (o.gt.size() != 1) throw std::invalid_argument("partition takes exactly one --gt");
  const auto gt = ccm::io::read_mask_file(o.gt[0]);
  const auto vp = ccm::build_partition(ccm::label_components(gt), o.threads);
  ccm::io::write_file(o.out, vp.region);
  return kExitOk;
}

int cmd_simulate(const Options& o) {
  if (o.phantom == !o.gt.empty()) throw std::invalid_argument("simulate takes either --gt or --phantom");
  const auto suite = parse_suite(o, "dice");
  ccm::ScenarioConfig cfg;
  cfg.scenario = ccm::scenario_from_string(o.scenario);
  cfg.target = ccm::target_from_string(o.target);
  cfg.n = o.n;
  cfg.steps = o.steps;
  cfg.seed = o.seed;
  cfg.element = {ccm::element_kind_from_string(o.elem), 1};
  if (cfg.steps < 1) throw std::invalid_argument("--steps must be >= 1");

  Json params = metric_params(o, suite);
  params["scenario"] = o.scenario;
  params["target"] = o.target;
  params["n"] = o.n;
  params["steps"] = o.steps;
  params["seed"] = o.seed;
  params["insert_volume_percentile"] = cfg.insert_volume_percentile;
  params["phantom"] = o.phantom;
  params["rng"] = "mt19937_64 seeded by splitmix64(seed, input index)";

  // Inputs are read up front so a malformed file fails the whole run.
  std::vector<ccm::Mask3D> inputs;
  if (o.phantom) {
    inputs.push_back(ccm::default_phantom().mask);
  } else {
    for (const auto& p : o.gt) inputs.push_back(ccm::io::read_mask_file(p));
  }

  auto os = open_out(o.out);
  ccm::report::write_sweep_header(os);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string name = o.phantom ? "phantom" : o.gt[i];
    if (inputs.size() > 1) os << "# input " << i << ' ' << name << '\n';
    try {
      const auto sweep = ccm::run_sweep(inputs[i], cfg, suite, {o.threads, i, false});
      ccm::report::write_sweep_rows(os, sweep);
    } catch (const ccm::ScenarioPrecondition& e) {
      os << "# skipped " << name << ": " << e.what() << '\n';
      std::cerr << "skipped " << name << ": " << e.what() << '\n';
    }
  }
  auto ms = open_out(o.out + ".manifest.json");
  ms << manifest("simulate", params, o.gt).dump(2) << '\n';
  return kExitOk;
}

int cmd_phantom(const Options& o) {
  ccm::io::write_file(o.out, ccm::default_phantom().mask);
  return kExitOk;
}

void add_metric_flags(CLI::App* app, Options& o) {
  app->add_option("--metrics", o.metrics, "Comma list of dice,iou,nsd,hd,hd95,assd,pq,lesion-dice");
  app->add_option("--tau", o.tau, "NSD tolerance in physical units (default: max spacing)");
  app->add_option("--percentile", o.percentile, "Percentile for the hd metric (default 100)");
  app->add_option("--ld-dilations", o.ld_dilations, "Lesion Dice gt dilations before labeling");
  app->add_option("--ld-min-ml", o.ld_min_ml, "Lesion Dice minimum prediction volume for FP (ml)");
  app->add_option("--elem", o.elem, "Structuring element")->check(CLI::IsMember({"cross6", "cube26"}));
  app->add_option("--threads", o.threads, "Worker threads (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Connected-component-aware segmentation metrics"};
  app.set_version_flag("--version", CCMETRICS_VERSION);
  app.require_subcommand(1);

  auto* eval = app.add_subcommand("eval", "Evaluate a prediction against a ground truth");
  eval->add_option("--gt", o.gt, "Ground-truth MASK3D file")->required()->expected(1);
  eval->add_option("--pred", o.pred, "Prediction MASK3D file")->required();
  eval->add_option("--out", o.out, "Output prefix for .json and .csv")->required();
  add_metric_flags(eval, o);

  auto* part = app.add_subcommand("partition", "Export the Voronoi region labels of a ground truth");
  part->add_option("--gt", o.gt, "Ground-truth MASK3D file")->required()->expected(1);
  part->add_option("--out", o.out, "Output label MASK3D file")->required();
  part->add_option("--threads", o.threads, "Worker threads (default: all cores)");

  auto* sim = app.add_subcommand("simulate", "Run a degradation sweep");
  sim->add_option("--gt", o.gt, "Ground-truth MASK3D file(s)");
  sim->add_flag("--phantom", o.phantom, "Use the built-in three-sphere phantom");
  sim->add_option("--out", o.out, "Sweep CSV path")->required();
  sim->add_option("--scenario", o.scenario, "Scenario name");
  sim->add_option("--steps", o.steps, "Number of steps after step 0");
  sim->add_option("--n", o.n, "Number of selected components");
  sim->add_option("--target", o.target, "Selection rule")->check(CLI::IsMember({"smallest", "largest", "all"}));
  sim->add_option("--seed", o.seed, "RNG seed");
  add_metric_flags(sim, o);

  auto* ph = app.add_subcommand("phantom", "Write the default three-sphere phantom");
  ph->add_option("--out", o.out, "Output MASK3D file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  o.threads = ccm::resolve_threads(o.threads);
  try {
    if (*eval) return cmd_eval(o);
    if (*part) return cmd_partition(o);
    if (*sim) return cmd_simulate(o);
    return cmd_phantom(o);
  } catch (const ccm::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ccm::EmptyGroundTruth& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ccm::ScenarioPrecondition& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
