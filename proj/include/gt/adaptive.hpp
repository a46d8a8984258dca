#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "gt/core.hpp"
#include "gt/decoders.hpp"

namespace gt::adaptive {

// Fully resolved per-stage test budgets and the fractions/slacks that sized
// them.  The sizing formulas are asymptotic guarantees; the multipliers that
// make them work at desk scale live in gt/defaults.hpp.
struct StageBudgets {
  std::size_t n1 = 0;        // stage-1 non-adaptive tests
  std::size_t n2a = 0;       // NCOMP cleanup tests
  std::uint32_t ncheck = 0;  // per-item reps in the screening step
  std::uint32_t ntil = 0;    // per-item reps in the final individual step
  double alpha1 = 0.25;
  double alpha2 = 0.3;
  double gamma = 0.5;
  double zeta = 0.0;
  double eta = 0.5;
  double delta3 = 0.01;
  double nu = 0.0;           // stage-1 design intensity (0 = pipeline default)
  double nu2a = 0.0;         // cleanup design intensity (0 = pipeline default)
};

struct Multipliers {
  double c1 = 1.5;   // stage-1 scale
  double c2a = 8.0;  // cleanup scale
};

// Raw terms of the refined stage-1 sizing, in tests (nats-based formulas).
double n_mi1(std::uint32_t p, std::uint32_t k, double rho);
double n_mi2(std::uint32_t p, std::uint32_t k, double rho, double gamma,
             double delta2);
double n_conc(std::uint32_t k, double rho, double gamma, double delta2);
double n_indiv(std::uint32_t k, double rho, double gamma);

// Two-stage budgets: n1 = ceil(c1 * k log(p/k) / (log2 - H2(rho))),
// ntil = ceil((log k / D2(1/2 || rho))(1 + eta)),
// n2a = ceil(c2a * a1k * log(p / a1k)) with a1k = max(alpha1 * k, 1).
StageBudgets budgets_alg1(std::uint32_t p, std::uint32_t k, double rho,
                          double eta, double c1, double c2a, double alpha1);

// Three-stage budgets: n1 = ceil(c1 * max{n_mi1, n_mi2, n_conc}),
// ncheck = ceil(log(k^gamma / delta3) / D2(zeta || rho)), ntil as in alg1,
// cleanup sized by k^gamma.
StageBudgets budgets_alg2(std::uint32_t p, std::uint32_t k, double rho,
                          double gamma, double delta2, double alpha2,
                          double zeta, double eta, const Multipliers& mult,
                          double delta3 = 0.01);

// Noiseless two-stage: n1 = ceil(c1 * k log2(p/k)); stage 2 is one test per
// stage-1 item plus the cleanup.
StageBudgets budgets_noiseless(std::uint32_t p, std::uint32_t k, double c1,
                               double c2a, double alpha1);

// Z-channel three-stage: n1 = ceil(c1 * k log(p/k) / C(rho)),
// ncheck = ceil(log log k), ntil = ceil(c3 * log k).
StageBudgets budgets_zchannel(std::uint32_t p, std::uint32_t k, double rho,
                              double c1, double c2a, double alpha1,
                              double c3 = 2.0);

enum class Stage1Decoder { ThresholdDecoder, SeparateDecoding };

struct ProblemInstance {
  std::uint32_t p = 0;
  std::uint32_t k_declared = 0;  // defective count the algorithm designs for
  DefectiveSet truth;
  Channel channel;
};

struct PipelineResult {
  std::optional<DefectiveSet> estimate;
  Transcript transcript;
  bool failed = false;
  std::string failure_reason;
};

// Observation source for one trial.  The default plays the instance through
// its channel with (stage, index)-keyed noise draws; tests can substitute a
// replaying source to check that later-round pools depend only on earlier
// outcomes.
using TestOracle = std::function<std::uint8_t(
    const TestPool& pool, std::string_view stage, std::uint64_t a,
    std::uint64_t b)>;

TestOracle channel_oracle(const ProblemInstance& instance, StreamKey key);

// Two-stage pipeline: stage-1 Bernoulli design and partial-recovery decode,
// then one adaptive round holding the NCOMP cleanup of the complement and
// ntil individual repetitions of every stage-1 item (majority rule).
PipelineResult run_alg1(const ProblemInstance& instance,
                        const StageBudgets& budgets, Stage1Decoder stage1,
                        StreamKey key, const TestOracle* oracle = nullptr);

// Three-stage refinement: the second round adds ncheck screening reps per
// stage-1 item and keeps the |S1| - ceil(alpha2 k) most-positive items; the
// third round resolves the rest with ntil-rep majority votes.
PipelineResult run_alg2(const ProblemInstance& instance,
                        const StageBudgets& budgets, Stage1Decoder stage1,
                        StreamKey key, const TestOracle* oracle = nullptr);

// Noiseless specialization: the second round tests each stage-1 item once
// (classification is then exact) next to the usual cleanup.
PipelineResult run_noiseless_two_stage(const ProblemInstance& instance,
                                       const StageBudgets& budgets,
                                       Stage1Decoder stage1, StreamKey key,
                                       const TestOracle* oracle = nullptr);

// Z-channel pipeline: stage-1 intensity solves 1 - (1 - nu/k)^k = P*_U(1)
// for the capacity-achieving input; stages 2b and 3 declare on any positive
// outcome, which can never pick up a non-defective under this channel.
PipelineResult run_zchannel_three_stage(const ProblemInstance& instance,
                                        const StageBudgets& budgets,
                                        Stage1Decoder stage1, StreamKey key,
                                        const TestOracle* oracle = nullptr);

// Trivial single-round baseline: each item tested once, positives declared
// defective.  Errorless on the noiseless channel.
PipelineResult run_individual_testing(const ProblemInstance& instance,
                                      StreamKey key,
                                      const TestOracle* oracle = nullptr);

// Exact finite-k root of 1 - (1 - nu/k)^k = target.
double solve_bernoulli_nu(std::uint32_t k, double target);

}  // namespace gt::adaptive
