#include "gt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "gt/infotheory.hpp"

namespace gt::harness {

std::string to_string(PipelineKind k) {
  switch (k) {
    case PipelineKind::Alg1: return "alg1";
    case PipelineKind::Alg2: return "alg2";
    case PipelineKind::NoiselessTwoStage: return "noiseless_two_stage";
    case PipelineKind::ZChannelThreeStage: return "z_three_stage";
    case PipelineKind::IndividualTesting: return "individual";
  }
  return "?";
}

PipelineKind pipeline_from_string(const std::string& name) {
  if (name == "alg1") return PipelineKind::Alg1;
  if (name == "alg2") return PipelineKind::Alg2;
  if (name == "noiseless_two_stage") return PipelineKind::NoiselessTwoStage;
  if (name == "z_three_stage") return PipelineKind::ZChannelThreeStage;
  if (name == "individual") return PipelineKind::IndividualTesting;
  throw std::invalid_argument("unknown pipeline: " + name);
}

adaptive::StageBudgets resolve_budgets(const ExperimentConfig& cfg) {
  if (!cfg.derive) return cfg.budgets;
  const BudgetParams& bp = *cfg.derive;
  const std::uint32_t k = cfg.cardinality.kmax;
  const double rho = cfg.channel.rho;
  switch (cfg.pipeline) {
    case PipelineKind::Alg1:
      return adaptive::budgets_alg1(cfg.p, k, rho, bp.eta, bp.c1, bp.c2a,
                                    bp.alpha1);
    case PipelineKind::Alg2: {
      const double zeta =
          bp.zeta < 0.0 ? rho + 0.9 * (1.0 - 2.0 * rho) : bp.zeta;
      return adaptive::budgets_alg2(cfg.p, k, rho, bp.gamma, bp.delta2,
                                    bp.alpha2, zeta, bp.eta,
                                    {bp.c1, bp.c2a}, bp.delta3);
    }
    case PipelineKind::NoiselessTwoStage:
      return adaptive::budgets_noiseless(cfg.p, k, bp.c1, bp.c2a, bp.alpha1);
    case PipelineKind::ZChannelThreeStage:
      return adaptive::budgets_zchannel(cfg.p, k, rho, bp.c1, bp.c2a,
                                        bp.alpha1, bp.c3);
    case PipelineKind::IndividualTesting:
      return {};
  }
  return {};
}

void apply_knob(ExperimentConfig& cfg, const std::string& knob, double value) {
  const bool is_param = knob == "c1" || knob == "c2a" || knob == "c3" ||
                        knob == "eta" || knob == "alpha1" || knob == "alpha2" ||
                        knob == "gamma" || knob == "delta2" || knob == "zeta" ||
                        knob == "delta3";
  if (is_param) {
    if (!cfg.derive)
      throw std::invalid_argument("knob '" + knob +
                                  "' needs a derivable budget config");
    BudgetParams& bp = *cfg.derive;
    if (knob == "c1") bp.c1 = value;
    else if (knob == "c2a") bp.c2a = value;
    else if (knob == "c3") bp.c3 = value;
    else if (knob == "eta") bp.eta = value;
    else if (knob == "alpha1") bp.alpha1 = value;
    else if (knob == "alpha2") bp.alpha2 = value;
    else if (knob == "gamma") bp.gamma = value;
    else if (knob == "delta2") bp.delta2 = value;
    else if (knob == "zeta") bp.zeta = value;
    else bp.delta3 = value;
    return;
  }
  auto budgets = resolve_budgets(cfg);
  if (knob == "n1")
    budgets.n1 = static_cast<std::size_t>(value);
  else if (knob == "n2a")
    budgets.n2a = static_cast<std::size_t>(value);
  else if (knob == "ntil")
    budgets.ntil = static_cast<std::uint32_t>(value);
  else if (knob == "ncheck")
    budgets.ncheck = static_cast<std::uint32_t>(value);
  else
    throw std::invalid_argument("unknown sweep knob: " + knob);
  cfg.derive.reset();
  cfg.budgets = budgets;
}

WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t total,
                               double z) {
  if (total == 0) return {0.0, 1.0};
  const double n = static_cast<double>(total);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

TrialResult run_one_trial(const ExperimentConfig& cfg,
                          const adaptive::StageBudgets& budgets,
                          std::uint32_t trial) {
  TrialResult tr;
  tr.trial = trial;
  const auto t0 = std::chrono::steady_clock::now();
  const StreamKey key{cfg.master_seed, trial};
  Rng truth_rng(key, "truth");
  adaptive::ProblemInstance inst;
  inst.p = cfg.p;
  inst.k_declared = cfg.cardinality.kmax;
  inst.channel = cfg.channel;
  inst.truth = sample_defective_set(cfg.p, cfg.cardinality, truth_rng);

  adaptive::PipelineResult res;
  try {
    switch (cfg.pipeline) {
      case PipelineKind::Alg1:
        res = adaptive::run_alg1(inst, budgets, cfg.stage1, key);
        break;
      case PipelineKind::Alg2:
        res = adaptive::run_alg2(inst, budgets, cfg.stage1, key);
        break;
      case PipelineKind::NoiselessTwoStage:
        res = adaptive::run_noiseless_two_stage(inst, budgets, cfg.stage1, key);
        break;
      case PipelineKind::ZChannelThreeStage:
        res = adaptive::run_zchannel_three_stage(inst, budgets, cfg.stage1, key);
        break;
      case PipelineKind::IndividualTesting:
        res = adaptive::run_individual_testing(inst, key);
        break;
    }
  } catch (const std::exception& e) {
    // Misconfiguration surfaces per trial, never aborts the batch.
    tr.failed = true;
    tr.failure_reason = e.what();
    tr.distance = static_cast<std::uint32_t>(inst.truth.size());
    return tr;
  }
  tr.tests_used = res.transcript.total_tests();
  if (res.failed || !res.estimate) {
    tr.failed = true;
    tr.failure_reason = res.failure_reason;
    tr.distance = static_cast<std::uint32_t>(inst.truth.size());
  } else {
    tr.distance = distance(inst.truth, *res.estimate);
  }
  const auto t1 = std::chrono::steady_clock::now();
  tr.elapsed_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return tr;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1)
    throw std::invalid_argument("run_experiment: trials >= 1");
  cfg.cardinality.validate(cfg.p);
  const auto budgets = resolve_budgets(cfg);

  ExperimentSummary summary;
  summary.trials.resize(cfg.trials);
  const unsigned hw = std::max(1u, cfg.threads);
  if (hw == 1) {
    for (std::uint32_t t = 0; t < cfg.trials; ++t)
      summary.trials[t] = run_one_trial(cfg, budgets, t);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::uint32_t> next{0};
    for (unsigned w = 0; w < hw; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::uint32_t t = next.fetch_add(1);
          if (t >= cfg.trials) break;
          summary.trials[t] = run_one_trial(cfg, budgets, t);
        }
      });
    }
    for (auto& th : workers) th.join();
  }

  std::uint64_t errors = 0;
  double tests = 0.0;
  for (const auto& tr : summary.trials) {
    if (tr.is_error(cfg.dmax)) ++errors;
    tests += static_cast<double>(tr.tests_used);
  }
  summary.pe_hat = static_cast<double>(errors) / cfg.trials;
  summary.interval = wilson_interval(errors, cfg.trials);
  summary.mean_tests = tests / cfg.trials;
  return summary;
}

void write_trials_csv(std::ostream& os, const ExperimentSummary& summary,
                      std::uint32_t dmax) {
  os << "trial,tests,distance,error,reason\n";
  for (const auto& tr : summary.trials) {
    os << tr.trial << ',' << tr.tests_used << ',' << tr.distance << ','
       << (tr.is_error(dmax) ? 1 : 0) << ',' << tr.failure_reason << '\n';
  }
}

namespace {
std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}
}  // namespace

void write_summary_json(std::ostream& os, const ExperimentConfig& cfg,
                        const ExperimentSummary& summary) {
  os << "{\n"
     << "  \"pipeline\": \"" << to_string(cfg.pipeline) << "\",\n"
     << "  \"p\": " << cfg.p << ",\n"
     << "  \"kmin\": " << cfg.cardinality.kmin << ",\n"
     << "  \"kmax\": " << cfg.cardinality.kmax << ",\n"
     << "  \"channel\": \"" << cfg.channel.name() << "\",\n"
     << "  \"rho\": " << fmt12(cfg.channel.rho) << ",\n"
     << "  \"trials\": " << cfg.trials << ",\n"
     << "  \"seed\": " << cfg.master_seed << ",\n"
     << "  \"dmax\": " << cfg.dmax << ",\n"
     << "  \"pe_hat\": " << fmt12(summary.pe_hat) << ",\n"
     << "  \"wilson_lo\": " << fmt12(summary.interval.lo) << ",\n"
     << "  \"wilson_hi\": " << fmt12(summary.interval.hi) << ",\n"
     << "  \"mean_tests\": " << fmt12(summary.mean_tests) << "\n"
     << "}\n";
}

std::vector<SweepRow> sweep(const ExperimentConfig& cfg,
                            const std::string& knob,
                            std::vector<double> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    ExperimentConfig run_cfg = cfg;
    apply_knob(run_cfg, knob, v);
    run_cfg.master_seed =
        detail::mix64(cfg.master_seed ^ detail::mix64(std::bit_cast<std::uint64_t>(v)));
    const auto summary = run_experiment(run_cfg);
    rows.push_back({v, summary.pe_hat, summary.interval, summary.mean_tests});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::string& knob,
                     std::span<const SweepRow> rows) {
  os << knob << ",pe_hat,wilson_lo,wilson_hi,mean_tests\n";
  for (const auto& r : rows) {
    os << fmt12(r.value) << ',' << fmt12(r.pe_hat) << ','
       << fmt12(r.interval.lo) << ',' << fmt12(r.interval.hi) << ','
       << fmt12(r.mean_tests) << '\n';
  }
}

ChernoffReport empirical_chernoff_check(std::uint32_t N, double q,
                                        double qprime, std::uint32_t samples,
                                        std::uint64_t seed) {
  if (!(qprime < q))
    throw std::invalid_argument("empirical_chernoff_check: need qprime < q");
  ChernoffReport rep;
  rep.bound = std::exp(-static_cast<double>(N) * info::binary_kl(qprime, q));
  Rng rng({seed, 0}, "chernoff");
  const double cutoff = static_cast<double>(N) * qprime;
  std::uint64_t hits = 0;
  for (std::uint32_t s = 0; s < samples; ++s) {
    std::uint32_t z = 0;
    for (std::uint32_t i = 0; i < N; ++i)
      if (rng.bernoulli(q)) ++z;
    if (static_cast<double>(z) <= cutoff) ++hits;
  }
  rep.empirical = static_cast<double>(hits) / samples;
  rep.sigma = std::sqrt(std::max(rep.bound * (1.0 - rep.bound), 1e-12) /
                        samples);
  rep.pass = rep.empirical <= rep.bound + 3.0 * rep.sigma;
  return rep;
}

}  // namespace gt::harness
