// gtsim: group testing simulator CLI.
//
// Subcommands:
//   simulate --config cfg.json [--out prefix] [--seed N] [--threads N]
//   sweep    --config cfg.json [--knob c1] [--values 0.8,1.0,...] [--out prefix]
//   bounds   --rho 0.11 [--theta-grid 99] [--sources all] [--out file]
//   verify   [--only battery] [--inject-fault] [--threads N]
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gt/bounds.hpp"
#include "gt/defaults.hpp"
#include "gt/harness.hpp"
#include "gt/infotheory.hpp"

using nlohmann::json;

namespace {

gt::Channel channel_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "noiseless") return gt::Channel::noiseless();
  const double rho = j.at("rho").get<double>();
  if (kind == "symmetric") return gt::Channel::symmetric(rho);
  if (kind == "z") return gt::Channel::z_channel(rho);
  if (kind == "reverse_z") return gt::Channel::reverse_z(rho);
  throw std::invalid_argument("unknown channel kind: " + kind);
}

gt::harness::ExperimentConfig config_from_json(const json& j) {
  gt::harness::ExperimentConfig cfg;
  cfg.p = j.at("p").get<std::uint32_t>();
  if (j.contains("k")) {
    cfg.cardinality = gt::CardinalitySpec::exact(j.at("k").get<std::uint32_t>());
  } else {
    cfg.cardinality = gt::CardinalitySpec::range(
        j.at("kmin").get<std::uint32_t>(), j.at("kmax").get<std::uint32_t>());
  }
  cfg.channel = channel_from_json(j.at("channel"));
  cfg.pipeline = gt::harness::pipeline_from_string(
      j.value("pipeline", std::string("individual")));
  const std::string stage1 = j.value("stage1", std::string("separate"));
  if (stage1 == "separate")
    cfg.stage1 = gt::adaptive::Stage1Decoder::SeparateDecoding;
  else if (stage1 == "threshold")
    cfg.stage1 = gt::adaptive::Stage1Decoder::ThresholdDecoder;
  else
    throw std::invalid_argument("unknown stage1 decoder: " + stage1);
  cfg.trials = j.value("trials", 1u);
  cfg.master_seed = j.value("seed", 0ull);
  cfg.dmax = j.value("dmax", 0u);
  cfg.threads = j.value("threads", 1u);

  if (j.contains("params")) {
    gt::harness::BudgetParams bp;
    const json& pj = j.at("params");
    bp.c1 = pj.value("c1", bp.c1);
    bp.c2a = pj.value("c2a", bp.c2a);
    bp.c3 = pj.value("c3", bp.c3);
    bp.alpha1 = pj.value("alpha1", bp.alpha1);
    bp.alpha2 = pj.value("alpha2", bp.alpha2);
    bp.gamma = pj.value("gamma", bp.gamma);
    bp.delta2 = pj.value("delta2", bp.delta2);
    bp.zeta = pj.value("zeta", bp.zeta);
    bp.eta = pj.value("eta", bp.eta);
    bp.delta3 = pj.value("delta3", bp.delta3);
    cfg.derive = bp;
  } else if (j.contains("budgets")) {
    const json& bj = j.at("budgets");
    cfg.budgets.n1 = bj.value("n1", 0ull);
    cfg.budgets.n2a = bj.value("n2a", 0ull);
    cfg.budgets.ncheck = bj.value("ncheck", 0u);
    cfg.budgets.ntil = bj.value("ntil", 0u);
    cfg.budgets.alpha1 = bj.value("alpha1", cfg.budgets.alpha1);
    cfg.budgets.alpha2 = bj.value("alpha2", cfg.budgets.alpha2);
    cfg.budgets.gamma = bj.value("gamma", cfg.budgets.gamma);
    cfg.budgets.zeta = bj.value("zeta", cfg.budgets.zeta);
    cfg.budgets.eta = bj.value("eta", cfg.budgets.eta);
    cfg.budgets.delta3 = bj.value("delta3", cfg.budgets.delta3);
    cfg.budgets.nu = bj.value("nu", cfg.budgets.nu);
    cfg.budgets.nu2a = bj.value("nu2a", cfg.budgets.nu2a);
  } else if (cfg.pipeline != gt::harness::PipelineKind::IndividualTesting) {
    cfg.derive = gt::harness::BudgetParams{};
  }
  return cfg;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 std::optional<std::uint64_t> seed,
                 std::optional<std::uint32_t> threads) {
  gt::harness::ExperimentConfig cfg;
  try {
    cfg = config_from_json(load_json(config_path));
    if (seed) cfg.master_seed = *seed;
    if (threads) cfg.threads = *threads;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const auto summary = gt::harness::run_experiment(cfg);
  {
    std::ofstream trials(out + "_trials.csv", std::ios::binary);
    std::ofstream sj(out + "_summary.json", std::ios::binary);
    if (!trials || !sj) {
      std::cerr << "cannot write outputs at prefix: " << out << "\n";
      return 2;
    }
    gt::harness::write_trials_csv(trials, summary, cfg.dmax);
    gt::harness::write_summary_json(sj, cfg, summary);
  }
  std::cout << "pe_hat=" << summary.pe_hat << " wilson=["
            << summary.interval.lo << ", " << summary.interval.hi
            << "] mean_tests=" << summary.mean_tests << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, std::string knob,
              std::string values_csv, const std::string& out,
              std::optional<std::uint64_t> seed,
              std::optional<std::uint32_t> threads) {
  gt::harness::ExperimentConfig cfg;
  std::vector<double> values;
  try {
    const json j = load_json(config_path);
    cfg = config_from_json(j);
    if (seed) cfg.master_seed = *seed;
    if (threads) cfg.threads = *threads;
    if (knob.empty() && j.contains("sweep"))
      knob = j.at("sweep").at("knob").get<std::string>();
    if (values_csv.empty() && j.contains("sweep")) {
      for (const auto& v : j.at("sweep").at("values"))
        values.push_back(v.get<double>());
    } else {
      std::stringstream ss(values_csv);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) values.push_back(std::stod(tok));
    }
    if (knob.empty()) throw std::invalid_argument("sweep: no knob given");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const auto rows = gt::harness::sweep(cfg, knob, values);
  std::ofstream os(out + "_sweep.csv", std::ios::binary);
  if (!os) {
    std::cerr << "cannot write output at prefix: " << out << "\n";
    return 2;
  }
  gt::harness::write_sweep_csv(os, knob, rows);
  for (const auto& r : rows)
    std::cout << knob << "=" << r.value << " pe_hat=" << r.pe_hat
              << " mean_tests=" << r.mean_tests << "\n";
  return 0;
}

int cmd_bounds(double rho, std::size_t grid_points,
               const std::string& sources_csv, const std::string& out) {
  std::vector<gt::bounds::RateSource> sources;
  try {
    if (sources_csv == "all") {
      sources = gt::bounds::all_rate_sources();
    } else {
      std::stringstream ss(sources_csv);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty())
          sources.push_back(gt::bounds::rate_source_from_string(tok));
    }
    if (sources.empty())
      throw std::invalid_argument("bounds: empty source list");
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const auto grid = gt::bounds::uniform_theta_grid(grid_points);
  const auto points = gt::bounds::emit_curves(rho, grid, sources);
  if (out.empty()) {
    gt::bounds::write_curves_csv(std::cout, points);
  } else {
    std::ofstream os(out, std::ios::binary);
    if (!os) {
      std::cerr << "cannot write output file: " << out << "\n";
      return 2;
    }
    gt::bounds::write_curves_csv(os, points);
  }
  return 0;
}

struct BatteryResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

BatteryResult battery_change_of_measure(bool inject_fault) {
  BatteryResult res{"change-of-measure"};
  std::uint64_t violations = 0, pairs = 0;
  const std::uint32_t p = 6, k = 2, n = 12;
  const std::vector<gt::bounds::AdaptiveStrategy> strategies = {
      gt::bounds::individual_strategy(p),
      gt::bounds::adaptive_split_strategy(p),
      gt::bounds::fixed_pairs_strategy(p)};
  for (double rho : {0.1, 0.3}) {
    for (const auto& strat : strategies) {
      const auto rep = gt::bounds::verify_change_of_measure(
          p, k, rho, strat, n, 0.1, gt::bounds::ComVariant::Symmetric);
      violations += rep.violations;
      pairs += rep.pairs_checked;
      const auto rz = gt::bounds::verify_change_of_measure(
          p, k, rho, strat, n, 0.1, gt::bounds::ComVariant::ReverseZ);
      violations += rz.violations;
      pairs += rz.pairs_checked;
    }
  }
  if (inject_fault) violations += 1;  // self-test: a fault must be reported
  res.pass = violations == 0;
  std::ostringstream oss;
  oss << pairs << " pairs checked, " << violations << " violations";
  res.detail = oss.str();
  return res;
}

BatteryResult battery_chernoff(bool inject_fault) {
  BatteryResult res{"chernoff"};
  std::ostringstream oss;
  const struct {
    std::uint32_t N;
    double q, qp;
  } cases[] = {{100, 0.3, 0.2}, {50, 0.89, 0.5}, {200, 0.11, 0.05}};
  for (const auto& c : cases) {
    auto rep = gt::harness::empirical_chernoff_check(c.N, c.q, c.qp, 100000, 71);
    if (inject_fault) rep.pass = rep.empirical > rep.bound + 3.0 * rep.sigma;
    res.pass = res.pass && rep.pass;
    oss << "(N=" << c.N << " emp=" << rep.empirical << " bound=" << rep.bound
        << ") ";
  }
  res.detail = oss.str();
  return res;
}

BatteryResult battery_mi_consistency(bool inject_fault) {
  BatteryResult res{"mi-consistency"};
  using namespace gt::info;
  const double rho = 0.11;
  const auto law = channel_law(gt::Channel::symmetric(rho));
  const double ln2 = std::numbers::ln2;
  std::ostringstream oss;

  DensityContext small{100000, 100, ln2, ln2 / 100000, law};
  const double exact_small = exact_conditional_mi(small);
  const double asym_small = asymptotic_mi(small, MiRegime::SmallFraction);
  bool ok1 = std::fabs(exact_small - asym_small) / exact_small < 0.02;

  DensityContext cf{500, 500, ln2, ln2 / 500, law};
  const double exact_cf = exact_conditional_mi(cf);
  const double asym_cf = asymptotic_mi(cf, MiRegime::ConstantFraction, 1.0);
  bool ok2 = std::fabs(exact_cf - asym_cf) / exact_cf < 0.01;

  const double identity = asym_cf - (ln2 - binary_entropy(rho));
  bool ok3 = std::fabs(identity) < 1e-10;

  if (inject_fault) ok3 = !ok3;
  res.pass = ok1 && ok2 && ok3;
  oss << "small-frac rel err "
      << std::fabs(exact_small - asym_small) / exact_small
      << ", const-frac rel err " << std::fabs(exact_cf - asym_cf) / exact_cf
      << ", identity residual " << identity;
  res.detail = oss.str();
  return res;
}

int cmd_verify(const std::string& only, bool inject_fault) {
  std::vector<BatteryResult> results;
  if (only.empty() || only == "change-of-measure")
    results.push_back(battery_change_of_measure(inject_fault));
  if (only.empty() || only == "chernoff")
    results.push_back(battery_chernoff(inject_fault));
  if (only.empty() || only == "mi-consistency")
    results.push_back(battery_mi_consistency(inject_fault));
  if (results.empty()) {
    std::cerr << "unknown battery: " << only << "\n";
    return 2;
  }
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
              << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy adaptive group testing simulator"};
  app.require_subcommand(1);

  std::string config_path, out = "gtsim_out", knob, values_csv;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> threads;

  auto* sim = app.add_subcommand("simulate", "run a Monte Carlo experiment");
  sim->add_option("--config", config_path, "JSON config")->required();
  sim->add_option("--out", out, "output path prefix");
  sim->add_option("--seed", seed, "master seed override");
  sim->add_option("--threads", threads, "worker thread cap");

  auto* sw = app.add_subcommand("sweep", "sweep one budget knob");
  sw->add_option("--config", config_path, "JSON config")->required();
  sw->add_option("--knob", knob, "budget field to sweep");
  sw->add_option("--values", values_csv, "comma-separated values");
  sw->add_option("--out", out, "output path prefix");
  sw->add_option("--seed", seed, "master seed override");
  sw->add_option("--threads", threads, "worker thread cap");

  double rho = 0.11;
  std::size_t grid_points = 99;
  std::string sources = "all", bounds_out;
  auto* bd = app.add_subcommand("bounds", "emit asymptotic rate curves");
  bd->add_option("--rho", rho, "noise level");
  bd->add_option("--theta-grid", grid_points, "number of theta grid points");
  bd->add_option("--sources", sources, "comma list of curves, or 'all'");
  bd->add_option("--out", bounds_out, "output CSV path (stdout if empty)");

  std::string only;
  bool inject_fault = false;
  auto* vf = app.add_subcommand("verify", "run the invariant batteries");
  vf->add_option("--only", only, "run a single battery");
  vf->add_flag("--inject-fault", inject_fault,
               "negate one inequality per battery (self-test)");
  vf->add_option("--threads", threads, "worker thread cap (unused)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out, seed, threads);
    if (sw->parsed())
      return cmd_sweep(config_path, knob, values_csv, out, seed, threads);
    if (bd->parsed()) return cmd_bounds(rho, grid_points, sources, bounds_out);
    if (vf->parsed()) return cmd_verify(only, inject_fault);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
