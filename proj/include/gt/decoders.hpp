#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gt/core.hpp"
#include "gt/infotheory.hpp"

namespace gt::decode {

// Thresholds gamma_{k', ell} for the information-density decoder, keyed by
// assumed cardinality k' and partition size ell.  The known-k decoder only
// reads entries with k' = k.
class ThresholdTable {
 public:
  ThresholdTable() = default;
  explicit ThresholdTable(double delta1) : delta1_(delta1) {}

  double gamma(std::uint32_t kprime, std::uint32_t ell) const;
  void set(std::uint32_t kprime, std::uint32_t ell, double value) {
    gamma_[{kprime, ell}] = value;
  }
  double delta1() const { return delta1_; }

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> gamma_;
  double delta1_ = 1.0;
};

// gamma_ell = log C(p-k, ell) + log((k/delta1) C(k, ell)) for
// ell in (dmax, k], via log-gamma.
ThresholdTable default_thresholds(std::uint32_t p, std::uint32_t k,
                                  std::uint32_t dmax, double delta1);

struct DensityParams {
  double nu = 0.0;       // design intensity; q_one = nu / k (or nu / kmax)
  Channel channel;
};

// Same form with (k', ell) in place of (k, ell), populated for every
// cardinality in [kmin, kmax] and ell in [1, k'].  When the range is not
// degenerate, each entry is raised to at least mi_floor_fraction * n * I_ell
// computed under the k'-defectives model: a constant threshold cannot
// separate cardinalities (a strict subset of the truth drifts upward at a
// positive per-test rate), but candidates whose model actually matches the
// data concentrate at the full n * I_ell, so a mid fraction splits them.
ThresholdTable default_thresholds_range(std::uint32_t p, std::uint32_t kmin,
                                        std::uint32_t kmax, std::uint32_t dmax,
                                        double delta1, std::size_t n,
                                        const DensityParams& params,
                                        double mi_floor_fraction = 0.5);

double log_binomial_coefficient(double n, double k);

enum class DecodeStatus { Ok, NoValidSet, Ambiguous, TooLarge };

// Multiplicity handling: ErrorOnMultiple declares an error when more than
// one candidate passes; FirstAccept returns the first passer in enumeration
// order (smallest cardinality first, then lexicographic), which is what the
// partial-recovery pipeline stages use.
enum class MultiplicityRule { ErrorOnMultiple, FirstAccept };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::NoValidSet;
  std::optional<DefectiveSet> estimate;

  bool ok() const { return status == DecodeStatus::Ok; }
};

std::string to_string(DecodeStatus s);

// Searches all cardinality-k sets for one whose information density clears
// gamma_{|sdif|} on every partition with |sdif| > dmax.  The enumeration is
// rejected up front when C(p, k) exceeds the guard.
DecodeResult threshold_decode(const std::vector<TestPool>& pools,
                              const std::vector<std::uint8_t>& outcomes,
                              std::uint32_t p, std::uint32_t k,
                              std::uint32_t dmax, const ThresholdTable& table,
                              const DensityParams& params,
                              MultiplicityRule rule =
                                  MultiplicityRule::ErrorOnMultiple);

// Unknown-k variant: candidates of every cardinality in [kmin, kmax]; each
// candidate faces the full-partition checks at its own cardinality (pairs
// with a strict-subset union only discriminate when the cardinality slack
// is well below dmax, which desk-scale ranges violate), with densities at
// q_one = nu/kmax.  The smallest passing cardinality wins; ties there
// follow the rule.
DecodeResult threshold_decode_unknown_k(
    const std::vector<TestPool>& pools,
    const std::vector<std::uint8_t>& outcomes, std::uint32_t p,
    std::uint32_t kmin, std::uint32_t kmax, std::uint32_t dmax,
    const ThresholdTable& table, const DensityParams& params,
    MultiplicityRule rule = MultiplicityRule::ErrorOnMultiple);

inline constexpr double kEnumerationGuard = 1e7;

// Per-item test counts: N'_j tests include the item, N'_{j,1} of them
// returned positive.
struct ItemScore {
  std::uint32_t item = 0;
  std::uint32_t tests_included = 0;
  std::uint32_t positives = 0;
};

using ItemScoreBoard = std::vector<ItemScore>;

ItemScoreBoard score_items(const std::vector<TestPool>& pools,
                           const std::vector<std::uint8_t>& outcomes,
                           const std::vector<std::uint32_t>& items);

// Largest feasible margin: half the gap between 1-rho and the unconditional
// positive rate at c0 = kmin/kmax; the default margin is a third of it.
double ncomp_margin_limit(double rho, double nu, double c0);
double ncomp_margin_limit_zchannel(double rho, double nu, double c0);
double ncomp_default_margin(double rho, double nu, double c0);
double ncomp_default_margin_zchannel(double rho, double nu, double c0);

// Declares item j defective iff N'_{j,1} >= (1 - rho - margin) N'_j with
// N'_j > 0.  Channel must be symmetric or noiseless (rho = 0).
DefectiveSet ncomp_decode(const std::vector<TestPool>& pools,
                          const std::vector<std::uint8_t>& outcomes,
                          const std::vector<std::uint32_t>& population,
                          std::uint32_t kmax, double nu, const Channel& ch,
                          double margin, std::uint32_t kmin = 1);

// Same rule with the Z-channel unconditional positive rate in the margin
// feasibility check.
DefectiveSet ncomp_decode_zchannel(const std::vector<TestPool>& pools,
                                   const std::vector<std::uint8_t>& outcomes,
                                   const std::vector<std::uint32_t>& population,
                                   std::uint32_t kmax, double nu, double rho,
                                   double margin, std::uint32_t kmin = 1);

// Per-item log-likelihood ratio of the induced single-item channel against
// the unconditional output law, one score per item in [0, p).
std::vector<double> separate_scores(const std::vector<TestPool>& pools,
                                    const std::vector<std::uint8_t>& outcomes,
                                    std::uint32_t p, std::uint32_t k,
                                    double nu, const Channel& ch);

// Items whose score clears the threshold (default ln(p/k) at call sites).
DefectiveSet separate_decode(const std::vector<TestPool>& pools,
                             const std::vector<std::uint8_t>& outcomes,
                             std::uint32_t p, std::uint32_t k, double nu,
                             const Channel& ch, double threshold_nats);

// The k items with the largest separate-decoding scores (ties: smaller index).
DefectiveSet separate_top_k(const std::vector<TestPool>& pools,
                            const std::vector<std::uint8_t>& outcomes,
                            std::uint32_t p, std::uint32_t k, double nu,
                            const Channel& ch);

// Items positive in at least reps/2 of their tests (ties included).
DefectiveSet majority_vote(const ItemScoreBoard& board, std::uint32_t reps,
                           std::uint32_t p);

// The m items with the most positives; ties broken by smaller index.
DefectiveSet top_m_by_positives(const ItemScoreBoard& board, std::size_t m,
                                std::uint32_t p);

// Items with at least one positive test.
DefectiveSet any_positive(const ItemScoreBoard& board, std::uint32_t p);

}  // namespace gt::decode
