#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gt/adaptive.hpp"
#include "gt/core.hpp"

namespace gt::harness {

enum class PipelineKind {
  Alg1,
  Alg2,
  NoiselessTwoStage,
  ZChannelThreeStage,
  IndividualTesting,
};

std::string to_string(PipelineKind k);
PipelineKind pipeline_from_string(const std::string& name);

// Parameters the per-pipeline budget builders consume; zeta < 0 means the
// default rho + 0.9 (1 - 2 rho).
struct BudgetParams {
  double c1 = 1.5;
  double c2a = 8.0;
  double c3 = 2.0;
  double alpha1 = 0.25;
  double alpha2 = 0.3;
  double gamma = 0.5;
  double delta2 = 0.3;
  double zeta = -1.0;
  double eta = 0.5;
  double delta3 = 0.01;
};

struct ExperimentConfig {
  std::uint32_t p = 0;
  CardinalitySpec cardinality = CardinalitySpec::exact(1);
  Channel channel;
  PipelineKind pipeline = PipelineKind::IndividualTesting;
  adaptive::Stage1Decoder stage1 = adaptive::Stage1Decoder::SeparateDecoding;
  std::optional<BudgetParams> derive;  // rebuild budgets from these when set
  adaptive::StageBudgets budgets;      // used as-is otherwise
  std::uint32_t trials = 1;
  std::uint64_t master_seed = 0;
  std::uint32_t dmax = 0;   // partial-recovery radius; 0 = exact recovery
  std::uint32_t threads = 1;
};

// Budgets the run will actually use (derived or explicit).
adaptive::StageBudgets resolve_budgets(const ExperimentConfig& cfg);

// Applies a sweep knob: multiplier/fraction names (c1, c2a, c3, eta, alpha1,
// alpha2, gamma, delta2, zeta, delta3) require a derivable config; count
// names (n1, n2a, ntil, ncheck) pin the resolved field directly.
void apply_knob(ExperimentConfig& cfg, const std::string& knob, double value);

struct TrialResult {
  std::uint32_t trial = 0;
  std::size_t tests_used = 0;
  std::uint32_t distance = 0;
  bool failed = false;            // decoder-declared failure
  std::string failure_reason;
  double elapsed_ms = 0.0;        // not serialized; timing is not reproducible

  bool is_error(std::uint32_t dmax) const {
    return failed || distance > dmax;
  }
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% Wilson score interval for a binomial proportion.
WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t total,
                               double z = 1.959963984540054);

struct ExperimentSummary {
  double pe_hat = 0.0;
  WilsonInterval interval;
  double mean_tests = 0.0;
  std::vector<TrialResult> trials;
};

// Runs cfg.trials independent trials; each draws its randomness from streams
// keyed by (master_seed, trial_index), so the result is byte-identical for
// any thread count.  Per-trial decoder failures count as errors and never
// abort the batch.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

// trial,tests,distance,error,reason rows ordered by trial index.
void write_trials_csv(std::ostream& os, const ExperimentSummary& summary,
                      std::uint32_t dmax);

void write_summary_json(std::ostream& os, const ExperimentConfig& cfg,
                        const ExperimentSummary& summary);

struct SweepRow {
  double value = 0.0;
  double pe_hat = 0.0;
  WilsonInterval interval;
  double mean_tests = 0.0;
};

// One run_experiment per knob value, each with a seed derived from the
// value; rows come back sorted by value regardless of input order.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg,
                            const std::string& knob,
                            std::vector<double> values);

void write_sweep_csv(std::ostream& os, const std::string& knob,
                     std::span<const SweepRow> rows);

struct ChernoffReport {
  double empirical = 0.0;
  double bound = 0.0;     // e^{-N D2(qprime || q)}
  double sigma = 0.0;     // binomial std of the empirical frequency at the bound
  bool pass = false;      // empirical <= bound + 3 sigma
};

// Empirical check of P[Binomial(N, q) <= N qprime] against the Chernoff
// bound, with qprime < q.
ChernoffReport empirical_chernoff_check(std::uint32_t N, double q,
                                        double qprime, std::uint32_t samples,
                                        std::uint64_t seed);

}  // namespace gt::harness
