#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gt/core.hpp"

namespace gt::bounds {

// Rates are reported as multiples of k log2(p/k), so the noiseless counting
// bound sits exactly at 1.  Sparsity enters through theta with
// k log k = (theta/(1-theta)) k log(p/k) and k log p = (1/(1-theta)) k log(p/k).
enum class RateSource {
  ConverseSym,
  AchSimple,
  AchPractical,
  AchRefined,
  CapacityConverse,
  ZAch,
  ReverseZConverse,
  Noiseless,
};

std::string to_string(RateSource s);
RateSource rate_source_from_string(const std::string& name);
std::vector<RateSource> all_rate_sources();

struct RatePoint {
  double theta = 0.0;
  double rho = 0.0;
  RateSource source = RateSource::Noiseless;
  double rate = 1.0;
};

// max{ log2/(log2 - H2(rho)), (theta/(1-theta)) log2 / log((1-rho)/rho) }.
RatePoint converse_rate_symmetric(double theta, double rho);

// log2/(log2 - H2(rho)) + (theta/(1-theta)) log2 / D2(1/2 || rho).
RatePoint ach_rate_simple(double theta, double rho);

// Same with the first term multiplied by 1/log2.
RatePoint ach_rate_practical(double theta, double rho);

// inf over (gamma, delta2) in (0,1)^2 of
//   max{mi1, mi2(gamma,delta2), conc(gamma,delta2)} + indiv(gamma),
// by a 400x400 grid plus local refinement to 1e-6 on the rate.
RatePoint ach_rate_refined(double theta, double rho);

// Individual refined terms (normalized), exposed for the curve tests.
double refined_rate_at(double theta, double rho, double gamma, double delta2);

// log2 / C(channel) for any channel, independent of theta.
RatePoint capacity_converse_rate(double theta, const Channel& channel);

// max{ log2/C_Z(rho), (theta/(1-theta)) log2 / log(1/rho) }.
RatePoint reverse_z_converse_rate(double theta, double rho);

// log2 / C_Z(rho) at every theta.
RatePoint z_achievability_rate(double theta, double rho);

RatePoint evaluate_rate(RateSource source, double theta, double rho);

// One row per (theta, source), thetas in the given order.
std::vector<RatePoint> emit_curves(double rho,
                                   std::span<const double> theta_grid,
                                   std::span<const RateSource> sources);

// Header + rows at 12 significant digits, LF line endings.
void write_curves_csv(std::ostream& os, std::span<const RatePoint> points);

std::vector<double> uniform_theta_grid(std::size_t count);

// --- change-of-measure enumeration -------------------------------------

// Deterministic adaptive design: the i-th pool is a pure function of the
// first i-1 outcomes.
using AdaptiveStrategy =
    std::function<TestPool(std::span<const std::uint8_t> history)>;

AdaptiveStrategy individual_strategy(std::uint32_t p);
AdaptiveStrategy adaptive_split_strategy(std::uint32_t p);
AdaptiveStrategy fixed_pairs_strategy(std::uint32_t p);

enum class ComVariant { Symmetric, ReverseZ };

struct ChangeOfMeasureReport {
  std::uint64_t outcome_sequences = 0;
  std::uint64_t pairs_checked = 0;
  std::uint64_t violations = 0;
  double min_margin = 0.0;  // min of P_{S\j}[y] - P_S[y] r^{(1+2eps)n/k}
};

// Enumerates every defective set of size k and every outcome sequence of
// length n, and checks P_{S\{j}}[y] >= P_S[y] * r^{(1+2eps)n/k} whenever
// item j appears alone in at most (1+2eps)n/k tests, with r = rho/(1-rho)
// for the symmetric variant and r = rho for the reverse-Z variant.
ChangeOfMeasureReport verify_change_of_measure(
    std::uint32_t p, std::uint32_t k, double rho,
    const AdaptiveStrategy& strategy, std::uint32_t n, double epsilon,
    ComVariant variant = ComVariant::Symmetric);

}  // namespace gt::bounds
