// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.  Tolerances are pinned in the checks themselves.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "gt/bounds.hpp"
#include "gt/decoders.hpp"
#include "gt/defaults.hpp"
#include "gt/design.hpp"
#include "gt/harness.hpp"
#include "gt/infotheory.hpp"

using namespace gt;
constexpr double kLn2 = std::numbers::ln2;

namespace {

struct Criterion {
  int id;
  std::string name;
  bool pass = true;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------- 1
Criterion bound_curve_suite() {
  Criterion c{1, "bound curves"};
  Timer timer;
  std::ostringstream detail;
  const auto grid = bounds::uniform_theta_grid(99);
  bool sandwich = true;
  for (double rho : {0.11, 1e-4}) {
    for (double theta : grid) {
      const double conv = bounds::converse_rate_symmetric(theta, rho).rate;
      const double refined = bounds::ach_rate_refined(theta, rho).rate;
      const double simple = bounds::ach_rate_simple(theta, rho).rate;
      sandwich = sandwich && conv <= refined + 1e-9 && refined <= simple + 1e-9;
    }
  }
  detail << (sandwich ? "sandwich ok" : "SANDWICH VIOLATED");

  bool capacity_limit = true;
  for (double rho : {0.11, 1e-4}) {
    const double refined = bounds::ach_rate_refined(1e-3, rho).rate;
    const double cap = kLn2 / (kLn2 - info::binary_entropy(rho));
    capacity_limit = capacity_limit && std::fabs(refined - cap) < 1e-3;
  }
  detail << "; capacity limit " << (capacity_limit ? "ok" : "VIOLATED");

  const double refined95 = bounds::ach_rate_refined(0.95, 1e-4).rate;
  const double conv95 = bounds::converse_rate_symmetric(0.95, 1e-4).rate;
  const double ratio = refined95 / conv95;
  const bool ratio_ok = ratio <= 1.02;
  detail << "; refined/converse@(rho=1e-4,theta=0.95)=" << fmt(ratio)
         << (ratio_ok ? " <= 1.02" : " NOT <= 1.02");

  const double secs = timer.seconds();
  const bool time_ok = secs < 10.0;
  detail << "; " << fmt(secs) << "s" << (time_ok ? "" : " OVER 10s");
  c.pass = sandwich && capacity_limit && ratio_ok && time_ok;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 2
Criterion change_of_measure_suite() {
  Criterion c{2, "change-of-measure enumeration"};
  Timer timer;
  const std::uint32_t p = 6, k = 2, n = 14;
  std::uint64_t violations = 0, pairs = 0;
  const std::vector<bounds::AdaptiveStrategy> strategies = {
      bounds::individual_strategy(p), bounds::adaptive_split_strategy(p),
      bounds::fixed_pairs_strategy(p)};
  for (double rho : {0.1, 0.3}) {
    for (const auto& strat : strategies) {
      for (auto variant :
           {bounds::ComVariant::Symmetric, bounds::ComVariant::ReverseZ}) {
        const auto rep =
            bounds::verify_change_of_measure(p, k, rho, strat, n, 0.1, variant);
        violations += rep.violations;
        pairs += rep.pairs_checked;
      }
    }
  }
  const double secs = timer.seconds();
  c.pass = violations == 0 && secs < 60.0;
  std::ostringstream detail;
  detail << pairs << " pairs, " << violations << " violations; " << fmt(secs)
         << "s" << (secs < 60.0 ? "" : " OVER 60s");
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 3
Criterion chernoff_suite() {
  Criterion c{3, "Chernoff binomial tail"};
  std::ostringstream detail;
  const struct {
    std::uint32_t N;
    double q, qp;
  } cases[] = {{100, 0.3, 0.2}, {50, 0.89, 0.5}, {200, 0.11, 0.05}};
  for (const auto& tc : cases) {
    const auto rep =
        harness::empirical_chernoff_check(tc.N, tc.q, tc.qp, 100000, 2027);
    c.pass = c.pass && rep.pass;
    detail << "(N=" << tc.N << ": emp " << fmt(rep.empirical) << " vs bound "
           << fmt(rep.bound) << (rep.pass ? " ok) " : " FAIL) ");
  }
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 4
Criterion mi_consistency_suite() {
  Criterion c{4, "mutual information consistency"};
  using namespace info;
  const double rho = 0.11;
  const auto law = channel_law(Channel::symmetric(rho));
  std::ostringstream detail;

  DensityContext small{100000, 100, kLn2, kLn2 / 100000, law};
  const double rel_small =
      std::fabs(exact_conditional_mi(small) -
                asymptotic_mi(small, MiRegime::SmallFraction)) /
      exact_conditional_mi(small);
  const bool ok_small = rel_small < 0.02;

  DensityContext cf{500, 500, kLn2, kLn2 / 500, law};
  const double rel_cf = std::fabs(exact_conditional_mi(cf) -
                                  asymptotic_mi(cf, MiRegime::ConstantFraction,
                                                1.0)) /
                        exact_conditional_mi(cf);
  const bool ok_cf = rel_cf < 0.01;

  const double identity =
      std::fabs(asymptotic_mi(cf, MiRegime::ConstantFraction, 1.0) -
                (kLn2 - binary_entropy(rho)));
  const bool ok_identity = identity < 1e-10;

  // Empirical per-test density mean vs exact I_ell, 1e5 samples.
  DensityContext ctx{5, 2, kLn2, kLn2 / 5, law};
  const double target = exact_conditional_mi(ctx);
  Rng rng({2028, 0}, "density");
  double sum = 0.0, sumsq = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    bool dif = false, eq = false;
    for (std::uint32_t j = 0; j < ctx.ell; ++j) dif |= rng.bernoulli(ctx.q_one);
    for (std::uint32_t j = 0; j < ctx.k - ctx.ell; ++j)
      eq |= rng.bernoulli(ctx.q_one);
    const bool u = dif || eq;
    const bool yv = rng.bernoulli(ctx.law.p(1, u ? 1 : 0));
    const double d = per_test_density(dif, eq, yv ? 1 : 0, ctx);
    sum += d;
    sumsq += d * d;
  }
  const double mean = sum / draws;
  const double sigma =
      std::sqrt((sumsq / draws - mean * mean) / draws);
  const bool ok_emp = std::fabs(mean - target) <= 3.0 * sigma + 1e-9;

  c.pass = ok_small && ok_cf && ok_identity && ok_emp;
  detail << "small-frac rel " << fmt(rel_small) << (ok_small ? " ok" : " FAIL")
         << "; const-frac rel " << fmt(rel_cf) << (ok_cf ? " ok" : " FAIL")
         << "; identity " << fmt(identity) << (ok_identity ? " ok" : " FAIL")
         << "; empirical mean z=" << fmt(std::fabs(mean - target) / sigma)
         << (ok_emp ? " ok" : " FAIL");
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 5
Criterion capacity_suite() {
  Criterion c{5, "channel capacities"};
  std::ostringstream detail;
  bool sym_ok = true;
  for (double rho = 0.01; rho < 0.495; rho += 0.02) {
    const auto cap = info::channel_capacity(
        info::channel_law(Channel::symmetric(rho)));
    sym_ok = sym_ok &&
             std::fabs(cap.capacity - (kLn2 - info::binary_entropy(rho))) <
                 1e-8;
  }
  detail << "symmetric closed form " << (sym_ok ? "ok" : "FAIL");

  bool z_ok = true;
  for (double rho : {0.3, 0.5}) {
    const auto law = info::channel_law(Channel::z_channel(rho));
    const auto cap = info::channel_capacity(law);
    double brute = 0.0;
    for (int i = 1; i < 1000000; ++i)
      brute = std::max(brute, info::mutual_information(i * 1e-6, law));
    z_ok = z_ok && std::fabs(cap.capacity - brute) < 1e-8;
  }
  detail << "; z brute force " << (z_ok ? "ok" : "FAIL");

  bool eq_ok = true;
  for (double rho : {0.1, 0.3, 0.5, 0.8}) {
    const double cz =
        info::channel_capacity(info::channel_law(Channel::z_channel(rho)))
            .capacity;
    const double crz =
        info::channel_capacity(info::channel_law(Channel::reverse_z(rho)))
            .capacity;
    eq_ok = eq_ok && std::fabs(cz - crz) < 1e-8;
  }
  detail << "; z == reverse-z " << (eq_ok ? "ok" : "FAIL");
  c.pass = sym_ok && z_ok && eq_ok;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 6
Criterion threshold_desk_suite() {
  Criterion c{6, "threshold decoder at desk scale"};
  Timer timer;
  std::ostringstream detail;
  const std::uint32_t p = 16;
  const auto ch = Channel::symmetric(0.11);
  const std::size_t n = 150;

  const auto simulate = [&](const DefectiveSet& truth, StreamKey key) {
    design::DesignSpec spec;
    spec.p = p;
    spec.n = n;
    spec.population.resize(p);
    for (std::uint32_t i = 0; i < p; ++i) spec.population[i] = i;
    spec.q_one = kLn2 / 2;
    auto pools = design::bernoulli_matrix(spec, SubstreamSource(key, "design"));
    std::vector<std::uint8_t> outcomes(n);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(key, "channel", i);
      outcomes[i] = run_test(pools[i], truth, ch, rng);
    }
    return std::make_pair(std::move(pools), std::move(outcomes));
  };

  int known_hits = 0;
  {
    const auto table = decode::default_thresholds(p, 2, 0, fixtures::kDelta1);
    for (std::uint32_t t = 0; t < 200; ++t) {
      const StreamKey key{6001, t};
      Rng tr(key, "truth");
      const auto truth = sample_defective_set(p, CardinalitySpec::exact(2), tr);
      const auto [pools, outcomes] = simulate(truth, key);
      const auto res = decode::threshold_decode(pools, outcomes, p, 2, 0,
                                                table, {kLn2, ch});
      if (res.ok() && *res.estimate == truth) ++known_hits;
    }
  }
  const bool known_ok = known_hits >= 180;
  detail << "known-k " << known_hits << "/200" << (known_ok ? "" : " FAIL");

  int unk_hits = 0;
  {
    const auto table = decode::default_thresholds_range(
        p, 1, 2, 0, fixtures::kDelta1, n, {kLn2, ch});
    for (std::uint32_t t = 0; t < 200; ++t) {
      const StreamKey key{6002, t};
      Rng tr(key, "truth");
      const auto truth =
          sample_defective_set(p, CardinalitySpec::range(1, 2), tr);
      const auto [pools, outcomes] = simulate(truth, key);
      const auto res = decode::threshold_decode_unknown_k(
          pools, outcomes, p, 1, 2, 0, table, {kLn2, ch});
      if (res.ok() && *res.estimate == truth) ++unk_hits;
    }
  }
  const bool unk_ok = unk_hits >= 170;
  detail << "; unknown-k " << unk_hits << "/200" << (unk_ok ? "" : " FAIL");

  // Smallest-cardinality tie rule on a constructed noiseless instance:
  // {a,b} and {a,b,c} both pass, the smaller one must win.
  bool tie_ok = false;
  {
    const std::uint32_t pp = 6;
    struct Row {
      std::vector<std::uint32_t> items;
      std::uint8_t y;
    };
    const std::vector<Row> rows = {
        {{0}, 1}, {{1}, 1}, {{0, 1}, 1}, {{1, 2}, 1}, {{1, 2}, 1}, {{0}, 1},
        {{1}, 1}, {{3}, 0}, {{4}, 0},    {{5}, 0},    {{0}, 1},    {{1}, 1},
    };
    std::vector<TestPool> pools;
    std::vector<std::uint8_t> outcomes;
    for (const auto& row : rows) {
      TestPool pool(pp);
      for (auto item : row.items) pool.set(item);
      pools.push_back(pool);
      outcomes.push_back(row.y);
    }
    decode::ThresholdTable table(0.1);
    for (std::uint32_t kp = 2; kp <= 3; ++kp)
      for (std::uint32_t ell = 1; ell <= kp; ++ell) table.set(kp, ell, -0.5);
    const decode::DensityParams params{kLn2, Channel::noiseless()};
    const auto res = decode::threshold_decode_unknown_k(pools, outcomes, pp, 2,
                                                        3, 0, table, params);
    const auto sup = decode::threshold_decode_unknown_k(pools, outcomes, pp, 3,
                                                        3, 0, table, params);
    tie_ok = res.ok() &&
             res.estimate->items == std::vector<std::uint32_t>{0, 1} &&
             sup.ok() &&
             sup.estimate->items == std::vector<std::uint32_t>{0, 1, 2};
  }
  detail << "; tie rule " << (tie_ok ? "ok" : "FAIL");

  const double secs = timer.seconds();
  const bool time_ok = secs < 300.0;
  detail << "; " << fmt(secs) << "s" << (time_ok ? "" : " OVER 300s");
  c.pass = known_ok && unk_ok && tie_ok && time_ok;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 7
Criterion pipeline_suite() {
  Criterion c{7, "end-to-end pipelines"};
  std::ostringstream detail;

  harness::ExperimentConfig alg1;
  alg1.p = 2000;
  alg1.cardinality = CardinalitySpec::exact(20);
  alg1.channel = Channel::symmetric(0.11);
  alg1.pipeline = harness::PipelineKind::Alg1;
  alg1.stage1 = adaptive::Stage1Decoder::SeparateDecoding;
  {
    harness::BudgetParams bp;
    bp.c1 = fixtures::kAlg1SeparateC1;
    bp.c2a = fixtures::kAlg1SeparateC2a;
    bp.alpha1 = fixtures::kAlg1SeparateAlpha1;
    alg1.derive = bp;
  }
  alg1.trials = 200;
  alg1.master_seed = 7001;
  alg1.threads = 8;
  const auto s1 = harness::run_experiment(alg1);
  const bool alg1_ok = s1.pe_hat <= 0.1 && s1.interval.hi <= 0.15;
  detail << "alg1 pe=" << fmt(s1.pe_hat) << " hi=" << fmt(s1.interval.hi)
         << (alg1_ok ? " ok" : " FAIL");

  harness::ExperimentConfig alg2 = alg1;
  alg2.pipeline = harness::PipelineKind::Alg2;
  {
    harness::BudgetParams bp;
    bp.c1 = fixtures::kAlg2C1;
    bp.c2a = fixtures::kAlg2C2a;
    bp.gamma = fixtures::kAlg2Gamma;
    bp.delta2 = fixtures::kAlg2Delta2;
    bp.alpha2 = fixtures::kAlg2Alpha2;
    bp.delta3 = fixtures::kAlg2Delta3;
    alg2.derive = bp;
  }
  alg2.master_seed = 7002;
  const auto s2 = harness::run_experiment(alg2);
  const bool alg2_ok = s2.pe_hat <= 0.1 && s2.interval.hi <= 0.15;
  detail << "; alg2 pe=" << fmt(s2.pe_hat) << " hi=" << fmt(s2.interval.hi)
         << (alg2_ok ? " ok" : " FAIL");

  // Budget sweep: error must trend down in c1 (one-sided sign test, 5%).
  harness::ExperimentConfig sweep_cfg = alg1;
  sweep_cfg.master_seed = 7003;
  const auto rows = harness::sweep(
      sweep_cfg, "c1", {0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0});
  int decreases = 0, increases = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].pe_hat < rows[i - 1].pe_hat) ++decreases;
    if (rows[i].pe_hat > rows[i - 1].pe_hat) ++increases;
  }
  const int m = decreases + increases;
  double pvalue = 0.0;
  for (int x = decreases; x <= m; ++x) {
    const double logc = std::lgamma(m + 1.0) - std::lgamma(x + 1.0) -
                        std::lgamma(m - x + 1.0);
    pvalue += std::exp(logc - m * kLn2);
  }
  const bool sweep_ok = m > 0 && pvalue <= 0.05;
  detail << "; sweep sign test p=" << fmt(pvalue)
         << (sweep_ok ? " ok" : " FAIL");

  harness::ExperimentConfig noiseless;
  noiseless.p = 4096;
  noiseless.cardinality = CardinalitySpec::exact(64);
  noiseless.channel = Channel::noiseless();
  noiseless.pipeline = harness::PipelineKind::NoiselessTwoStage;
  noiseless.stage1 = adaptive::Stage1Decoder::SeparateDecoding;
  {
    harness::BudgetParams bp;
    bp.c1 = fixtures::kNoiselessC1;
    bp.c2a = fixtures::kNoiselessC2a;
    bp.alpha1 = fixtures::kNoiselessAlpha1;
    noiseless.derive = bp;
  }
  noiseless.trials = 100;
  noiseless.master_seed = 7004;
  noiseless.threads = 8;
  const auto s3 = harness::run_experiment(noiseless);
  const double success = 1.0 - s3.pe_hat;
  const double budget_cap = 2.5 * 64 * std::log2(4096.0 / 64);
  const bool success_ok = success >= 0.95;
  const bool budget_ok = s3.mean_tests <= budget_cap;
  detail << "; noiseless success=" << fmt(success)
         << (success_ok ? " ok" : " FAIL") << ", tests=" << fmt(s3.mean_tests)
         << (budget_ok ? " <= " : " NOT <= ") << fmt(budget_cap);

  c.pass = alg1_ok && alg2_ok && sweep_ok && success_ok && budget_ok;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 8
Criterion z_structural_suite() {
  Criterion c{8, "z-channel zero false positives in stages 2b/3"};
  // With the cleanup stage disabled, the estimate is exactly the union of
  // the stage-2b and stage-3 declarations.
  const std::uint32_t p = 64, k = 4;
  auto budgets = adaptive::budgets_zchannel(p, k, 0.3, 1.4, 8.0, 0.9);
  budgets.n2a = 0;
  std::uint64_t false_positives = 0, trials_run = 0;
  for (std::uint32_t t = 0; t < 10000; ++t) {
    const StreamKey key{8001, t};
    adaptive::ProblemInstance inst;
    inst.p = p;
    inst.k_declared = k;
    inst.channel = Channel::z_channel(0.3);
    Rng tr(key, "truth");
    inst.truth = sample_defective_set(p, CardinalitySpec::exact(k), tr);
    const auto res = adaptive::run_zchannel_three_stage(
        inst, budgets, adaptive::Stage1Decoder::SeparateDecoding, key, nullptr);
    ++trials_run;
    if (res.failed || !res.estimate) continue;
    for (auto item : res.estimate->items)
      if (!inst.truth.contains(item)) ++false_positives;
  }
  c.pass = false_positives == 0;
  std::ostringstream detail;
  detail << trials_run << " trials, " << false_positives
         << " false positives from stages 2b/3";
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------- 9
Criterion reproducibility_suite() {
  Criterion c{9, "byte-identical reruns at any thread count"};
  harness::ExperimentConfig cfg;
  cfg.p = 400;
  cfg.cardinality = CardinalitySpec::exact(6);
  cfg.channel = Channel::symmetric(0.11);
  cfg.pipeline = harness::PipelineKind::Alg2;
  cfg.stage1 = adaptive::Stage1Decoder::SeparateDecoding;
  cfg.derive = harness::BudgetParams{};
  cfg.derive->alpha2 = 0.5;  // k^gamma < alpha2 * k at k = 6
  cfg.trials = 50;
  cfg.master_seed = 9001;

  std::string reference;
  bool all_equal = true;
  for (std::uint32_t threads : {1u, 3u, 8u}) {
    cfg.threads = threads;
    const auto summary = harness::run_experiment(cfg);
    std::ostringstream os;
    harness::write_trials_csv(os, summary, cfg.dmax);
    if (reference.empty())
      reference = os.str();
    else
      all_equal = all_equal && os.str() == reference;
  }
  c.pass = all_equal && !reference.empty();
  c.detail = all_equal ? "threads {1,3,8} identical" : "MISMATCH across threads";
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(bound_curve_suite());
  results.push_back(change_of_measure_suite());
  results.push_back(chernoff_suite());
  results.push_back(mi_consistency_suite());
  results.push_back(capacity_suite());
  results.push_back(threshold_desk_suite());
  results.push_back(pipeline_suite());
  results.push_back(z_structural_suite());
  results.push_back(reproducibility_suite());

  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%zu criteria, %d failed\n", results.size(), failures);
  return failures == 0 ? 0 : 1;
}
