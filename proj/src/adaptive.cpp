#include "gt/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gt/design.hpp"

namespace gt::adaptive {

namespace {

constexpr double kLn2 = std::numbers::ln2;

double h2(double rho) { return info::binary_entropy(rho); }
double d2(double a, double b) { return info::binary_kl(a, b); }

std::size_t ceil_count(double x) {
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(x - 1e-12));
}

std::vector<std::uint32_t> full_population(std::uint32_t p) {
  std::vector<std::uint32_t> pop(p);
  for (std::uint32_t i = 0; i < p; ++i) pop[i] = i;
  return pop;
}

std::vector<std::uint32_t> complement_of(const DefectiveSet& s,
                                         std::uint32_t p) {
  std::vector<std::uint32_t> out;
  out.reserve(p - s.items.size());
  auto it = s.items.begin();
  for (std::uint32_t i = 0; i < p; ++i) {
    if (it != s.items.end() && *it == i) {
      ++it;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

double channel_rho(const Channel& ch) {
  return ch.kind == ChannelKind::Noiseless ? 0.0 : ch.rho;
}

}  // namespace

double n_mi1(std::uint32_t p, std::uint32_t k, double rho) {
  return k * std::log(static_cast<double>(p) / k) / (kLn2 - h2(rho));
}

double n_mi2(std::uint32_t p, std::uint32_t k, double rho, double gamma,
             double delta2) {
  const double logpk = k * std::log(static_cast<double>(p) / k);
  const double klogk = k * std::log(static_cast<double>(k));
  return 2.0 * (logpk + 2.0 * (1.0 - gamma) * klogk) /
         (kLn2 * (1.0 - 2.0 * rho) * std::log((1.0 - rho) / rho) *
          (1.0 - delta2));
}

double n_conc(std::uint32_t k, double rho, double gamma, double delta2) {
  const double klogk = k * std::log(static_cast<double>(k));
  return 4.0 * (1.0 + delta2 * (1.0 - 2.0 * rho) / 3.0) * (1.0 - gamma) *
         klogk /
         (kLn2 * delta2 * delta2 * (1.0 - 2.0 * rho) * (1.0 - 2.0 * rho));
}

double n_indiv(std::uint32_t k, double rho, double gamma) {
  const double klogk = k * std::log(static_cast<double>(k));
  return gamma * klogk / d2(rho, 1.0 - rho);
}

StageBudgets budgets_alg1(std::uint32_t p, std::uint32_t k, double rho,
                          double eta, double c1, double c2a, double alpha1) {
  if (!(rho > 0.0 && rho < 0.5))
    throw std::invalid_argument("budgets_alg1: rho in (0, 1/2)");
  if (k < 2) throw std::invalid_argument("budgets_alg1: k >= 2 (log k degenerate)");
  if (!(eta > 0.0) || !(c1 > 0.0) || !(c2a > 0.0) ||
      !(alpha1 > 0.0 && alpha1 < 1.0))
    throw std::invalid_argument("budgets_alg1: bad parameters");
  StageBudgets b;
  b.alpha1 = alpha1;
  b.eta = eta;
  b.n1 = ceil_count(c1 * n_mi1(p, k, rho));
  b.ntil = static_cast<std::uint32_t>(
      ceil_count(std::log(static_cast<double>(k)) / d2(0.5, rho) * (1.0 + eta)));
  const double a1k = std::max(alpha1 * k, 1.0);
  b.n2a = ceil_count(c2a * a1k * std::log(p / a1k));
  return b;
}

StageBudgets budgets_alg2(std::uint32_t p, std::uint32_t k, double rho,
                          double gamma, double delta2, double alpha2,
                          double zeta, double eta, const Multipliers& mult,
                          double delta3) {
  if (!(rho > 0.0 && rho < 0.5))
    throw std::invalid_argument("budgets_alg2: rho in (0, 1/2)");
  if (k < 2) throw std::invalid_argument("budgets_alg2: k >= 2");
  if (!(gamma > 0.0 && gamma < 1.0) || !(delta2 > 0.0 && delta2 < 1.0) ||
      !(alpha2 > 0.0 && alpha2 < 1.0) || !(eta > 0.0) ||
      !(delta3 > 0.0 && delta3 < 1.0))
    throw std::invalid_argument("budgets_alg2: bad parameters");
  if (!(zeta > rho && zeta < 1.0 - rho))
    throw std::invalid_argument("budgets_alg2: zeta must lie in (rho, 1-rho)");
  const double kgamma = std::pow(static_cast<double>(k), gamma);
  if (!(kgamma < alpha2 * k))
    throw std::invalid_argument("budgets_alg2: need k^gamma < alpha2 * k");
  StageBudgets b;
  b.gamma = gamma;
  b.alpha2 = alpha2;
  b.zeta = zeta;
  b.eta = eta;
  b.delta3 = delta3;
  const double stage1 =
      std::max({n_mi1(p, k, rho), n_mi2(p, k, rho, gamma, delta2),
                n_conc(k, rho, gamma, delta2)});
  b.n1 = ceil_count(mult.c1 * stage1);
  b.ncheck = static_cast<std::uint32_t>(
      ceil_count(std::log(kgamma / delta3) / d2(zeta, rho)));
  b.ntil = static_cast<std::uint32_t>(
      ceil_count(std::log(static_cast<double>(k)) / d2(0.5, rho) * (1.0 + eta)));
  b.n2a = ceil_count(mult.c2a * kgamma * std::log(p / kgamma));
  return b;
}

StageBudgets budgets_noiseless(std::uint32_t p, std::uint32_t k, double c1,
                               double c2a, double alpha1) {
  if (k < 1 || k > p) throw std::invalid_argument("budgets_noiseless: bad k");
  StageBudgets b;
  b.alpha1 = alpha1;
  b.n1 = ceil_count(c1 * k * std::log2(static_cast<double>(p) / k));
  b.ntil = 1;
  const double a1k = std::max(alpha1 * k, 1.0);
  b.n2a = ceil_count(c2a * a1k * std::log(p / a1k));
  return b;
}

StageBudgets budgets_zchannel(std::uint32_t p, std::uint32_t k, double rho,
                              double c1, double c2a, double alpha1, double c3) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("budgets_zchannel: rho in (0, 1)");
  if (k < 2) throw std::invalid_argument("budgets_zchannel: k >= 2");
  StageBudgets b;
  b.alpha1 = alpha1;
  const double cap =
      info::channel_capacity(info::channel_law(Channel::z_channel(rho)))
          .capacity;
  b.n1 = ceil_count(c1 * k * std::log(static_cast<double>(p) / k) / cap);
  const double loglogk = std::log(std::max(std::log(static_cast<double>(k)), 1.0));
  b.ncheck = static_cast<std::uint32_t>(std::max<std::size_t>(ceil_count(loglogk), 1));
  b.ntil = static_cast<std::uint32_t>(
      ceil_count(c3 * std::log(static_cast<double>(k))));
  const double a1k = std::max(alpha1 * k, 1.0);
  b.n2a = ceil_count(c2a * a1k * std::log(p / a1k));
  b.nu2a = 1.2;
  return b;
}

double solve_bernoulli_nu(std::uint32_t k, double target) {
  if (k == 0 || !(target > 0.0 && target < 1.0))
    throw std::invalid_argument("solve_bernoulli_nu: bad arguments");
  // 1 - (1 - nu/k)^k is increasing in nu on [0, k].
  double lo = 0.0, hi = static_cast<double>(k) * (1.0 - 1e-12);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double val = -std::expm1(k * std::log1p(-mid / k));
    if (val < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

TestOracle channel_oracle(const ProblemInstance& instance, StreamKey key) {
  return [instance, key](const TestPool& pool, std::string_view stage,
                         std::uint64_t a, std::uint64_t b) -> std::uint8_t {
    Rng rng(key, std::string("channel.") + std::string(stage), a, b);
    return run_test(pool, instance.truth, instance.channel, rng);
  };
}

namespace {

struct StageRunner {
  const ProblemInstance& instance;
  StreamKey key;
  TestOracle oracle;
  Transcript transcript;

  StageRunner(const ProblemInstance& inst, StreamKey k, const TestOracle* o)
      : instance(inst),
        key(k),
        oracle(o ? *o : channel_oracle(inst, k)) {}

  std::vector<std::uint8_t> observe_rows(const std::vector<TestPool>& pools,
                                         std::string_view stage) {
    std::vector<std::uint8_t> out(pools.size());
    for (std::size_t i = 0; i < pools.size(); ++i) {
      out[i] = oracle(pools[i], stage, i, 0);
      transcript.entries.emplace_back(pools[i], out[i]);
    }
    return out;
  }

  std::vector<std::uint8_t> observe_plan(
      const std::vector<std::pair<std::uint32_t, TestPool>>& plan,
      std::string_view stage) {
    std::vector<std::uint8_t> out(plan.size());
    std::uint32_t rep = 0;
    std::uint32_t prev_item = plan.empty() ? 0 : plan[0].first;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      const auto& [item, pool] = plan[i];
      if (item != prev_item) {
        rep = 0;
        prev_item = item;
      }
      out[i] = oracle(pool, stage, item, rep++);
      transcript.entries.emplace_back(pool, out[i]);
    }
    return out;
  }
};

PipelineResult decode_failure(StageRunner& run, std::string reason) {
  PipelineResult r;
  r.transcript = std::move(run.transcript);
  r.failed = true;
  r.failure_reason = std::move(reason);
  return r;
}

struct Stage1Outcome {
  bool ok = false;
  DefectiveSet estimate;
  std::string error;
};

Stage1Outcome run_stage1(StageRunner& run, const StageBudgets& budgets,
                         Stage1Decoder decoder, std::uint32_t dmax,
                         double nu) {
  const auto& inst = run.instance;
  const std::uint32_t p = inst.p;
  const std::uint32_t k = inst.k_declared;
  run.transcript.mark_stage("stage1");
  Stage1Outcome out;
  design::DesignSpec spec;
  spec.p = p;
  spec.n = budgets.n1;
  spec.population = full_population(p);
  spec.q_one = std::min(nu / std::max(k, 1u), 0.99);
  const auto pools =
      design::bernoulli_matrix(spec, SubstreamSource(run.key, "design.stage1"));
  const auto outcomes = run.observe_rows(pools, "stage1");
  if (k == 0) {
    out.ok = true;
    out.estimate = DefectiveSet(p, {});
    return out;
  }

  if (decoder == Stage1Decoder::SeparateDecoding) {
    out.ok = true;
    out.estimate =
        decode::separate_top_k(pools, outcomes, p, k, nu, inst.channel);
    return out;
  }
  const std::uint32_t d = std::min(dmax, k - 1);
  const auto table = decode::default_thresholds(p, k, d, 0.1);
  const auto res = decode::threshold_decode(
      pools, outcomes, p, k, d, table, {nu, inst.channel},
      decode::MultiplicityRule::FirstAccept);
  if (!res.ok()) {
    out.error = "stage1 threshold decode: " + decode::to_string(res.status);
    return out;
  }
  out.ok = true;
  out.estimate = *res.estimate;
  return out;
}

// Cleanup of the complement of shat1; empty when n2a == 0 or nothing is left.
DefectiveSet run_cleanup(StageRunner& run, const StageBudgets& budgets,
                         const DefectiveSet& shat1, std::uint32_t kmax2a,
                         std::string_view stage) {
  const auto& inst = run.instance;
  const std::uint32_t p = inst.p;
  const auto population = complement_of(shat1, p);
  if (budgets.n2a == 0 || population.empty() || inst.k_declared == 0)
    return DefectiveSet(p, {});
  const double nu2a = budgets.nu2a > 0.0 ? budgets.nu2a : kLn2;
  design::DesignSpec spec;
  spec.p = p;
  spec.n = budgets.n2a;
  spec.population = population;
  spec.q_one = std::min(nu2a / kmax2a, 0.99);
  const double nu_eff = spec.q_one * kmax2a;
  const auto pools = design::bernoulli_matrix(
      spec, SubstreamSource(run.key, "design.stage2a"));
  const auto outcomes = run.observe_rows(pools, stage);
  const double c0 = 1.0 / kmax2a;
  if (inst.channel.kind == ChannelKind::ZChannel) {
    const double margin =
        decode::ncomp_default_margin_zchannel(inst.channel.rho, nu_eff, c0);
    return decode::ncomp_decode_zchannel(pools, outcomes, population, kmax2a,
                                         nu_eff, inst.channel.rho, margin);
  }
  const double rho = channel_rho(inst.channel);
  const double margin = decode::ncomp_default_margin(rho, nu_eff, c0);
  return decode::ncomp_decode(pools, outcomes, population, kmax2a, nu_eff,
                              inst.channel, margin);
}

PipelineResult finish(StageRunner& run, DefectiveSet estimate) {
  PipelineResult r;
  r.estimate = std::move(estimate);
  r.transcript = std::move(run.transcript);
  return r;
}

}  // namespace

PipelineResult run_alg1(const ProblemInstance& instance,
                        const StageBudgets& budgets, Stage1Decoder stage1,
                        StreamKey key, const TestOracle* oracle) {
  const std::uint32_t k = instance.k_declared;
  StageRunner run(instance, key, oracle);
  const double nu = budgets.nu > 0.0 ? budgets.nu : kLn2;
  const auto dmax =
      static_cast<std::uint32_t>(std::ceil(budgets.alpha1 * k));
  auto s1 = run_stage1(run, budgets, stage1, dmax, nu);
  if (!s1.ok) return decode_failure(run, s1.error);

  run.transcript.mark_stage("stage2");
  const auto kmax2a = static_cast<std::uint32_t>(
      std::max(1.0, std::ceil(budgets.alpha1 * k)));
  const auto shat2a = run_cleanup(run, budgets, s1.estimate, kmax2a, "stage2a");

  DefectiveSet shat2b(instance.p, {});
  if (budgets.ntil >= 1 && !s1.estimate.items.empty()) {
    const auto plan =
        design::individual_plan(s1.estimate.items, budgets.ntil, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage2b");
    std::vector<TestPool> pools;
    pools.reserve(plan.size());
    for (const auto& [item, pool] : plan) pools.push_back(pool);
    const auto board =
        decode::score_items(pools, outcomes, s1.estimate.items);
    shat2b = decode::majority_vote(board, budgets.ntil, instance.p);
  }
  return finish(run, set_union(shat2a, shat2b));
}

PipelineResult run_alg2(const ProblemInstance& instance,
                        const StageBudgets& budgets, Stage1Decoder stage1,
                        StreamKey key, const TestOracle* oracle) {
  const std::uint32_t k = instance.k_declared;
  StageRunner run(instance, key, oracle);
  const double nu = budgets.nu > 0.0 ? budgets.nu : kLn2;
  const double kgamma = std::pow(static_cast<double>(std::max(k, 1u)),
                                 budgets.gamma);
  const auto dmax = static_cast<std::uint32_t>(std::ceil(kgamma));
  auto s1 = run_stage1(run, budgets, stage1, dmax, nu);
  if (!s1.ok) return decode_failure(run, s1.error);

  run.transcript.mark_stage("stage2");
  const auto kmax2a =
      static_cast<std::uint32_t>(std::max(1.0, std::ceil(kgamma)));
  const auto shat2a = run_cleanup(run, budgets, s1.estimate, kmax2a, "stage2a");

  DefectiveSet shat2b(instance.p, {});
  decode::ItemScoreBoard board;
  if (budgets.ncheck >= 1 && !s1.estimate.items.empty()) {
    const auto plan =
        design::individual_plan(s1.estimate.items, budgets.ncheck, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage2b");
    std::vector<TestPool> pools;
    pools.reserve(plan.size());
    for (const auto& [item, pool] : plan) pools.push_back(pool);
    board = decode::score_items(pools, outcomes, s1.estimate.items);
    const auto cut = static_cast<std::size_t>(std::ceil(budgets.alpha2 * k));
    const std::size_t m =
        s1.estimate.items.size() > cut ? s1.estimate.items.size() - cut : 0;
    shat2b = decode::top_m_by_positives(board, m, instance.p);
  }

  run.transcript.mark_stage("stage3");
  DefectiveSet shat3(instance.p, {});
  std::vector<std::uint32_t> remaining;
  for (std::uint32_t item : s1.estimate.items)
    if (!shat2b.contains(item)) remaining.push_back(item);
  if (budgets.ntil >= 1 && !remaining.empty()) {
    const auto plan =
        design::individual_plan(remaining, budgets.ntil, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage3");
    std::vector<TestPool> pools;
    pools.reserve(plan.size());
    for (const auto& [item, pool] : plan) pools.push_back(pool);
    const auto b3 = decode::score_items(pools, outcomes, remaining);
    shat3 = decode::majority_vote(b3, budgets.ntil, instance.p);
  }
  return finish(run, set_union(set_union(shat2a, shat2b), shat3));
}

PipelineResult run_noiseless_two_stage(const ProblemInstance& instance,
                                       const StageBudgets& budgets,
                                       Stage1Decoder stage1, StreamKey key,
                                       const TestOracle* oracle) {
  if (instance.channel.kind != ChannelKind::Noiseless)
    throw std::invalid_argument(
        "run_noiseless_two_stage: channel must be noiseless");
  const std::uint32_t k = instance.k_declared;
  StageRunner run(instance, key, oracle);
  const double nu = budgets.nu > 0.0 ? budgets.nu : kLn2;
  const auto dmax =
      static_cast<std::uint32_t>(std::ceil(budgets.alpha1 * k));
  auto s1 = run_stage1(run, budgets, stage1, dmax, nu);
  if (!s1.ok) return decode_failure(run, s1.error);

  run.transcript.mark_stage("stage2");
  const auto kmax2a = static_cast<std::uint32_t>(
      std::max(1.0, std::ceil(budgets.alpha1 * k)));
  const auto shat2a = run_cleanup(run, budgets, s1.estimate, kmax2a, "stage2a");

  DefectiveSet shat2b(instance.p, {});
  if (!s1.estimate.items.empty()) {
    const auto plan =
        design::individual_plan(s1.estimate.items, 1, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage2b");
    std::vector<std::uint32_t> positive;
    for (std::size_t i = 0; i < plan.size(); ++i)
      if (outcomes[i]) positive.push_back(plan[i].first);
    std::sort(positive.begin(), positive.end());
    shat2b = DefectiveSet(instance.p, std::move(positive));
  }
  return finish(run, set_union(shat2a, shat2b));
}

PipelineResult run_zchannel_three_stage(const ProblemInstance& instance,
                                        const StageBudgets& budgets,
                                        Stage1Decoder stage1, StreamKey key,
                                        const TestOracle* oracle) {
  if (instance.channel.kind != ChannelKind::ZChannel)
    throw std::invalid_argument(
        "run_zchannel_three_stage: channel must be a Z channel");
  const std::uint32_t k = instance.k_declared;
  if (k == 0)
    throw std::invalid_argument("run_zchannel_three_stage: k >= 1 required");
  StageRunner run(instance, key, oracle);

  // Stage-1 intensity matches the OR distribution to the capacity-achieving
  // input of the channel, at finite k.
  const auto cap = info::channel_capacity(info::channel_law(instance.channel));
  const double nu = solve_bernoulli_nu(k, cap.p_u_star);
  const auto dmax =
      static_cast<std::uint32_t>(std::ceil(budgets.alpha1 * k));
  auto s1 = run_stage1(run, budgets, stage1, dmax, nu);
  if (!s1.ok) return decode_failure(run, s1.error);

  run.transcript.mark_stage("stage2");
  const auto kmax2a = static_cast<std::uint32_t>(
      std::max(1.0, std::ceil(budgets.alpha1 * k)));
  const auto shat2a = run_cleanup(run, budgets, s1.estimate, kmax2a, "stage2a");

  DefectiveSet shat2b(instance.p, {});
  decode::ItemScoreBoard board;
  if (budgets.ncheck >= 1 && !s1.estimate.items.empty()) {
    const auto plan =
        design::individual_plan(s1.estimate.items, budgets.ncheck, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage2b");
    std::vector<TestPool> pools;
    pools.reserve(plan.size());
    for (const auto& [item, pool] : plan) pools.push_back(pool);
    board = decode::score_items(pools, outcomes, s1.estimate.items);
    shat2b = decode::any_positive(board, instance.p);
  }

  std::vector<std::uint32_t> remaining;
  for (std::uint32_t item : s1.estimate.items)
    if (!shat2b.contains(item)) remaining.push_back(item);
  if (remaining.size() >
      static_cast<std::size_t>(std::ceil(2.0 * budgets.alpha1 * k))) {
    return decode_failure(run, "stage2b left more items than the budget covers");
  }

  run.transcript.mark_stage("stage3");
  DefectiveSet shat3(instance.p, {});
  if (budgets.ntil >= 1 && !remaining.empty()) {
    const auto plan =
        design::individual_plan(remaining, budgets.ntil, instance.p);
    const auto outcomes = run.observe_plan(plan, "stage3");
    std::vector<TestPool> pools;
    pools.reserve(plan.size());
    for (const auto& [item, pool] : plan) pools.push_back(pool);
    const auto b3 = decode::score_items(pools, outcomes, remaining);
    shat3 = decode::any_positive(b3, instance.p);
  }
  return finish(run, set_union(set_union(shat2a, shat2b), shat3));
}

PipelineResult run_individual_testing(const ProblemInstance& instance,
                                      StreamKey key, const TestOracle* oracle) {
  StageRunner run(instance, key, oracle);
  run.transcript.mark_stage("stage1");
  std::vector<std::uint32_t> positive;
  for (std::uint32_t item = 0; item < instance.p; ++item) {
    TestPool pool(instance.p);
    pool.set(item);
    const std::uint8_t y = run.oracle(pool, "stage1", item, 0);
    run.transcript.entries.emplace_back(std::move(pool), y);
    if (y) positive.push_back(item);
  }
  return finish(run, DefectiveSet(instance.p, std::move(positive)));
}

}  // namespace gt::adaptive
