#include "gt/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gt::decode {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double ThresholdTable::gamma(std::uint32_t kprime, std::uint32_t ell) const {
  const auto it = gamma_.find({kprime, ell});
  if (it == gamma_.end()) {
    std::ostringstream oss;
    oss << "ThresholdTable: no gamma for (k'=" << kprime << ", ell=" << ell
        << ")";
    throw std::out_of_range(oss.str());
  }
  return it->second;
}

double log_binomial_coefficient(double n, double k) {
  if (k < 0 || k > n) return -kInf;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

ThresholdTable default_thresholds(std::uint32_t p, std::uint32_t k,
                                  std::uint32_t dmax, double delta1) {
  if (!(delta1 > 0.0 && delta1 <= 1.0))
    throw std::invalid_argument("default_thresholds: delta1 in (0,1]");
  if (!(dmax < k && k <= p))
    throw std::invalid_argument("default_thresholds: need dmax < k <= p");
  ThresholdTable table(delta1);
  for (std::uint32_t ell = dmax + 1; ell <= k; ++ell) {
    const double g = log_binomial_coefficient(p - k, ell) +
                     std::log(k / delta1) + log_binomial_coefficient(k, ell);
    table.set(k, ell, g);
  }
  return table;
}

ThresholdTable default_thresholds_range(std::uint32_t p, std::uint32_t kmin,
                                        std::uint32_t kmax, std::uint32_t dmax,
                                        double delta1, std::size_t n,
                                        const DensityParams& params,
                                        double mi_floor_fraction) {
  if (!(delta1 > 0.0 && delta1 <= 1.0))
    throw std::invalid_argument("default_thresholds_range: delta1 in (0,1]");
  if (!(kmin >= 1 && kmin <= kmax && kmax <= p))
    throw std::invalid_argument("default_thresholds_range: bad range");
  (void)dmax;
  const auto law = info::channel_law(params.channel);
  const double q_one = params.nu / kmax;
  ThresholdTable table(delta1);
  for (std::uint32_t kp = kmin; kp <= kmax; ++kp)
    for (std::uint32_t ell = 1; ell <= kp; ++ell) {
      double g = log_binomial_coefficient(p - kp, ell) +
                 std::log(kp / delta1) + log_binomial_coefficient(kp, ell);
      if (kmin < kmax) {
        info::DensityContext ctx{kp, ell, params.nu, q_one, law};
        g = std::max(g, mi_floor_fraction * static_cast<double>(n) *
                            info::exact_conditional_mi(ctx));
      }
      table.set(kp, ell, g);
    }
  return table;
}

std::string to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Ok: return "ok";
    case DecodeStatus::NoValidSet: return "no_valid_set";
    case DecodeStatus::Ambiguous: return "ambiguous";
    case DecodeStatus::TooLarge: return "too_large";
  }
  return "?";
}

namespace {

// Per-item columns: bit i set iff test i includes the item.
std::vector<BitVec> build_columns(const std::vector<TestPool>& pools,
                                  std::uint32_t p) {
  const std::size_t n = pools.size();
  std::vector<BitVec> cols(p, BitVec(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (pools[i].size() != p)
      throw std::invalid_argument("pool length differs from population");
    for (std::uint32_t item : pools[i].set_bits()) cols[item].set(i);
  }
  return cols;
}

BitVec outcome_bits(const std::vector<std::uint8_t>& outcomes) {
  BitVec y(outcomes.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i]) y.set(i);
  return y;
}

struct ComboValues {
  // density value for (dif_active, y) with eq inactive
  double v[2][2];
};

ComboValues combo_values(const info::DensityContext& ctx) {
  ComboValues cv{};
  for (int d = 0; d < 2; ++d)
    for (int y = 0; y < 2; ++y)
      cv.v[d][y] = info::per_test_density(d != 0, false,
                                          static_cast<std::uint8_t>(y), ctx);
  return cv;
}

// Density of one partition from the OR-columns, via masked popcounts.
double partition_density(const BitVec& dif, const BitVec& eq, const BitVec& y,
                         std::size_t n, const ComboValues& cv) {
  std::uint64_t c11 = 0, c10 = 0, c01 = 0, c00 = 0;
  const auto& dw = dif.words();
  const auto& ew = eq.words();
  const auto& yw = y.words();
  const std::size_t nwords = dw.size();
  for (std::size_t w = 0; w < nwords; ++w) {
    std::uint64_t mask = ~0ULL;
    if (w == nwords - 1 && (n & 63) != 0) mask = (1ULL << (n & 63)) - 1;
    const std::uint64_t ne = ~ew[w] & mask;
    const std::uint64_t d = dw[w];
    const std::uint64_t yy = yw[w];
    c11 += std::popcount(d & ne & yy);
    c10 += std::popcount(d & ne & ~yy);
    c01 += std::popcount(~d & ne & yy);
    c00 += std::popcount(~d & ne & ~yy);
  }
  double sum = 0.0;
  const std::uint64_t counts[2][2] = {{c00, c01}, {c10, c11}};
  for (int d = 0; d < 2; ++d)
    for (int yv = 0; yv < 2; ++yv) {
      if (counts[d][yv] == 0) continue;
      const double v = cv.v[d][yv];
      if (v == -kInf) return -kInf;
      sum += static_cast<double>(counts[d][yv]) * v;
    }
  return sum;
}

// Lexicographic k-combinations of [0, p).
bool next_combination(std::vector<std::uint32_t>& c, std::uint32_t p) {
  const auto k = static_cast<std::uint32_t>(c.size());
  if (k == 0) return false;
  std::int64_t i = k - 1;
  while (i >= 0 && c[i] == p - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (auto j = static_cast<std::uint32_t>(i + 1); j < k; ++j)
    c[j] = c[j - 1] + 1;
  return true;
}

double binomial_count(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0.0;
  return std::exp(log_binomial_coefficient(n, k));
}

// All checks of the known-k decoder for one candidate: every split
// (sdif, seq) of the candidate with |sdif| > dmax must clear its gamma.
bool candidate_passes_known_k(const std::vector<BitVec>& cols,
                              const std::vector<std::uint32_t>& cand,
                              const BitVec& y, std::size_t n,
                              std::uint32_t dmax, const ThresholdTable& table,
                              const std::vector<ComboValues>& cv_by_ell,
                              std::uint32_t k) {
  const std::uint32_t kc = static_cast<std::uint32_t>(cand.size());
  const std::uint32_t full = (kc >= 32) ? 0 : (1u << kc);
  for (std::uint32_t mask = 1; mask + 1 <= full; ++mask) {
    const auto ell = static_cast<std::uint32_t>(std::popcount(mask));
    if (ell <= dmax) continue;
    BitVec dif(n), eq(n);
    for (std::uint32_t j = 0; j < kc; ++j) {
      if (mask & (1u << j))
        dif |= cols[cand[j]];
      else
        eq |= cols[cand[j]];
    }
    const double dens = partition_density(dif, eq, y, n, cv_by_ell[ell]);
    if (!(dens >= table.gamma(k, ell))) return false;
  }
  return true;
}

}  // namespace

DecodeResult threshold_decode(const std::vector<TestPool>& pools,
                              const std::vector<std::uint8_t>& outcomes,
                              std::uint32_t p, std::uint32_t k,
                              std::uint32_t dmax, const ThresholdTable& table,
                              const DensityParams& params,
                              MultiplicityRule rule) {
  if (pools.size() != outcomes.size())
    throw std::invalid_argument("threshold_decode: pools/outcomes mismatch");
  if (k == 0 || k > p)
    throw std::invalid_argument("threshold_decode: need 1 <= k <= p");
  if (k >= 31 || binomial_count(p, k) > kEnumerationGuard)
    return {DecodeStatus::TooLarge, std::nullopt};

  const std::size_t n = pools.size();
  const auto cols = build_columns(pools, p);
  const BitVec y = outcome_bits(outcomes);
  const auto law = info::channel_law(params.channel);
  const double q_one = params.nu / k;

  std::vector<ComboValues> cv_by_ell(k + 1);
  for (std::uint32_t ell = 1; ell <= k; ++ell) {
    info::DensityContext ctx{k, ell, params.nu, q_one, law};
    cv_by_ell[ell] = combo_values(ctx);
  }

  std::vector<std::uint32_t> cand(k);
  std::iota(cand.begin(), cand.end(), 0u);
  std::optional<DefectiveSet> winner;
  do {
    if (!candidate_passes_known_k(cols, cand, y, n, dmax, table, cv_by_ell, k))
      continue;
    if (rule == MultiplicityRule::FirstAccept)
      return {DecodeStatus::Ok, DefectiveSet(p, cand)};
    if (winner) return {DecodeStatus::Ambiguous, std::nullopt};
    winner = DefectiveSet(p, cand);
  } while (next_combination(cand, p));

  if (!winner) return {DecodeStatus::NoValidSet, std::nullopt};
  return {DecodeStatus::Ok, std::move(winner)};
}

DecodeResult threshold_decode_unknown_k(
    const std::vector<TestPool>& pools,
    const std::vector<std::uint8_t>& outcomes, std::uint32_t p,
    std::uint32_t kmin, std::uint32_t kmax, std::uint32_t dmax,
    const ThresholdTable& table, const DensityParams& params,
    MultiplicityRule rule) {
  if (pools.size() != outcomes.size())
    throw std::invalid_argument("threshold_decode_unknown_k: size mismatch");
  if (!(kmin >= 1 && kmin <= kmax && kmax <= p))
    throw std::invalid_argument("threshold_decode_unknown_k: bad range");
  double total = 0.0;
  for (std::uint32_t kc = kmin; kc <= kmax; ++kc)
    total += binomial_count(p, kc);
  if (kmax >= 31 || total > kEnumerationGuard)
    return {DecodeStatus::TooLarge, std::nullopt};

  const std::size_t n = pools.size();
  const auto cols = build_columns(pools, p);
  const BitVec y = outcome_bits(outcomes);
  const auto law = info::channel_law(params.channel);
  const double q_one = params.nu / kmax;  // design uses nu/kmax when k unknown

  // combo values per (k', ell)
  std::vector<std::vector<ComboValues>> cv(kmax + 1);
  for (std::uint32_t kp = kmin; kp <= kmax; ++kp) {
    cv[kp].resize(kp + 1);
    for (std::uint32_t ell = 1; ell <= kp; ++ell) {
      info::DensityContext ctx{kp, ell, params.nu, q_one, law};
      cv[kp][ell] = combo_values(ctx);
    }
  }

  for (std::uint32_t kc = kmin; kc <= kmax; ++kc) {
    std::vector<std::uint32_t> cand(kc);
    std::iota(cand.begin(), cand.end(), 0u);
    std::optional<DefectiveSet> winner;
    do {
      if (!candidate_passes_known_k(cols, cand, y, n, dmax, table, cv[kc], kc))
        continue;
      if (rule == MultiplicityRule::FirstAccept)
        return {DecodeStatus::Ok, DefectiveSet(p, cand)};
      if (winner) return {DecodeStatus::Ambiguous, std::nullopt};
      winner = DefectiveSet(p, cand);
    } while (next_combination(cand, p));
    if (winner) return {DecodeStatus::Ok, std::move(winner)};
  }
  return {DecodeStatus::NoValidSet, std::nullopt};
}

ItemScoreBoard score_items(const std::vector<TestPool>& pools,
                           const std::vector<std::uint8_t>& outcomes,
                           const std::vector<std::uint32_t>& items) {
  if (pools.size() != outcomes.size())
    throw std::invalid_argument("score_items: pools/outcomes mismatch");
  ItemScoreBoard board(items.size());
  if (items.empty()) return board;
  std::uint32_t p = 0;
  for (std::uint32_t it : items) p = std::max(p, it + 1);
  if (!pools.empty()) p = std::max(p, static_cast<std::uint32_t>(pools[0].size()));
  std::vector<std::int32_t> slot(p, -1);
  for (std::size_t i = 0; i < items.size(); ++i) {
    board[i].item = items[i];
    slot[items[i]] = static_cast<std::int32_t>(i);
  }
  for (std::size_t i = 0; i < pools.size(); ++i) {
    for (std::uint32_t item : pools[i].set_bits()) {
      const std::int32_t s = slot[item];
      if (s < 0) continue;
      ++board[s].tests_included;
      if (outcomes[i]) ++board[s].positives;
    }
  }
  return board;
}

namespace {

double symmetric_unconditional_rate(double rho, double nu, double c) {
  const double e = std::exp(-c * nu);
  return (1.0 - rho) * (1.0 - e) + rho * e;
}

double z_unconditional_rate(double rho, double nu, double c) {
  const double e = std::exp(-c * nu);
  return (1.0 - e) + rho * e;
}

void check_margin(double margin, double limit, const char* what) {
  if (!(margin > 0.0 && margin < limit)) {
    std::ostringstream oss;
    oss << what << ": margin must lie in (0, " << limit << "), got " << margin;
    throw std::invalid_argument(oss.str());
  }
}

double channel_rho_for_ncomp(const Channel& ch) {
  if (ch.kind == ChannelKind::Noiseless) return 0.0;
  if (ch.kind == ChannelKind::Symmetric) return ch.rho;
  throw std::invalid_argument("ncomp_decode: symmetric or noiseless channel only");
}

DefectiveSet threshold_by_fraction(const ItemScoreBoard& board,
                                   std::uint32_t p, double frac) {
  std::vector<std::uint32_t> out;
  for (const auto& s : board) {
    if (s.tests_included == 0) continue;
    if (static_cast<double>(s.positives) >=
        frac * static_cast<double>(s.tests_included))
      out.push_back(s.item);
  }
  std::sort(out.begin(), out.end());
  return DefectiveSet(p, std::move(out));
}

}  // namespace

double ncomp_margin_limit(double rho, double nu, double c0) {
  return 0.5 * ((1.0 - rho) - symmetric_unconditional_rate(rho, nu, c0));
}

double ncomp_margin_limit_zchannel(double rho, double nu, double c0) {
  return 0.5 * ((1.0 - rho) - z_unconditional_rate(rho, nu, c0));
}

double ncomp_default_margin(double rho, double nu, double c0) {
  return (2.0 / 3.0) * ncomp_margin_limit(rho, nu, c0);
}

double ncomp_default_margin_zchannel(double rho, double nu, double c0) {
  return (2.0 / 3.0) * ncomp_margin_limit_zchannel(rho, nu, c0);
}

DefectiveSet ncomp_decode(const std::vector<TestPool>& pools,
                          const std::vector<std::uint8_t>& outcomes,
                          const std::vector<std::uint32_t>& population,
                          std::uint32_t kmax, double nu, const Channel& ch,
                          double margin, std::uint32_t kmin) {
  if (kmax < 1 || kmin < 1 || kmin > kmax)
    throw std::invalid_argument("ncomp_decode: need 1 <= kmin <= kmax");
  const double rho = channel_rho_for_ncomp(ch);
  const double c0 = static_cast<double>(kmin) / kmax;
  check_margin(margin, ncomp_margin_limit(rho, nu, c0), "ncomp_decode");
  std::uint32_t p = population.empty() ? 0 : population.back() + 1;
  if (!pools.empty()) p = std::max(p, static_cast<std::uint32_t>(pools[0].size()));
  const auto board = score_items(pools, outcomes, population);
  return threshold_by_fraction(board, p, 1.0 - rho - margin);
}

DefectiveSet ncomp_decode_zchannel(const std::vector<TestPool>& pools,
                                   const std::vector<std::uint8_t>& outcomes,
                                   const std::vector<std::uint32_t>& population,
                                   std::uint32_t kmax, double nu, double rho,
                                   double margin, std::uint32_t kmin) {
  if (kmax < 1 || kmin < 1 || kmin > kmax)
    throw std::invalid_argument("ncomp_decode_zchannel: need 1 <= kmin <= kmax");
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("ncomp_decode_zchannel: rho in (0,1)");
  const double c0 = static_cast<double>(kmin) / kmax;
  check_margin(margin, ncomp_margin_limit_zchannel(rho, nu, c0),
               "ncomp_decode_zchannel");
  std::uint32_t p = population.empty() ? 0 : population.back() + 1;
  if (!pools.empty()) p = std::max(p, static_cast<std::uint32_t>(pools[0].size()));
  const auto board = score_items(pools, outcomes, population);
  return threshold_by_fraction(board, p, 1.0 - rho - margin);
}

std::vector<double> separate_scores(const std::vector<TestPool>& pools,
                                    const std::vector<std::uint8_t>& outcomes,
                                    std::uint32_t p, std::uint32_t k,
                                    double nu, const Channel& ch) {
  if (pools.size() != outcomes.size())
    throw std::invalid_argument("separate_scores: pools/outcomes mismatch");
  if (k == 0) return std::vector<double>(p, 0.0);
  const auto law = info::channel_law(ch);
  const double q = nu / k;
  const double log1mq = std::log1p(-q);
  const double pi_k = -std::expm1(k * log1mq);            // P[U=1]
  const double pi_rest = -std::expm1((k - 1.0) * log1mq); // other defectives

  // Per-test contributions given the item's inclusion bit, under the
  // defective hypothesis; the unconditional law is the denominator in both.
  // A zero-probability outcome under the full model contributes nothing.
  double c_in[2], c_out[2];
  for (int yv = 0; yv < 2; ++yv) {
    const auto y = static_cast<std::uint8_t>(yv);
    const double p_y = pi_k * law.p(y, 1) + (1.0 - pi_k) * law.p(y, 0);
    if (p_y == 0.0) {
      c_in[yv] = c_out[yv] = 0.0;
      continue;
    }
    const double p_in = law.p(y, 1);
    const double p_out = pi_rest * law.p(y, 1) + (1.0 - pi_rest) * law.p(y, 0);
    c_in[yv] = p_in == 0.0 ? -kInf : std::log(p_in / p_y);
    c_out[yv] = p_out == 0.0 ? -kInf : std::log(p_out / p_y);
  }

  // Per-item positive/included counts, then an infinity-aware combination;
  // naive base-plus-delta accumulation would form -inf + inf.
  std::vector<std::uint32_t> included(p, 0), included_pos(p, 0);
  std::size_t total_pos = 0;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    if (outcomes[i]) ++total_pos;
    for (std::uint32_t item : pools[i].set_bits())
      if (item < p) {
        ++included[item];
        if (outcomes[i]) ++included_pos[item];
      }
  }
  const std::size_t total_neg = pools.size() - total_pos;
  const auto term = [](std::size_t count, double val) {
    if (count == 0) return 0.0;
    if (val == -kInf) return -kInf;
    return static_cast<double>(count) * val;
  };
  std::vector<double> scores(p, 0.0);
  for (std::uint32_t j = 0; j < p; ++j) {
    const std::size_t a = included_pos[j];
    const std::size_t b = included[j] - a;
    scores[j] = term(a, c_in[1]) + term(b, c_in[0]) +
                term(total_pos - a, c_out[1]) + term(total_neg - b, c_out[0]);
  }
  return scores;
}

DefectiveSet separate_decode(const std::vector<TestPool>& pools,
                             const std::vector<std::uint8_t>& outcomes,
                             std::uint32_t p, std::uint32_t k, double nu,
                             const Channel& ch, double threshold_nats) {
  if (!std::isfinite(threshold_nats))
    throw std::invalid_argument("separate_decode: threshold must be finite");
  const auto scores = separate_scores(pools, outcomes, p, k, nu, ch);
  std::vector<std::uint32_t> out;
  for (std::uint32_t j = 0; j < p; ++j)
    if (scores[j] >= threshold_nats) out.push_back(j);
  return DefectiveSet(p, std::move(out));
}

DefectiveSet separate_top_k(const std::vector<TestPool>& pools,
                            const std::vector<std::uint8_t>& outcomes,
                            std::uint32_t p, std::uint32_t k, double nu,
                            const Channel& ch) {
  if (k == 0) return DefectiveSet(p, {});
  const auto scores = separate_scores(pools, outcomes, p, k, nu, ch);
  std::vector<std::uint32_t> idx(p);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<std::uint32_t> out(idx.begin(), idx.begin() + std::min<std::size_t>(k, p));
  std::sort(out.begin(), out.end());
  return DefectiveSet(p, std::move(out));
}

DefectiveSet majority_vote(const ItemScoreBoard& board, std::uint32_t reps,
                           std::uint32_t p) {
  std::vector<std::uint32_t> out;
  for (const auto& s : board) {
    if (s.tests_included != reps)
      throw std::invalid_argument("majority_vote: item not tested reps times");
    if (2ull * s.positives >= reps) out.push_back(s.item);
  }
  std::sort(out.begin(), out.end());
  return DefectiveSet(p, std::move(out));
}

DefectiveSet top_m_by_positives(const ItemScoreBoard& board, std::size_t m,
                                std::uint32_t p) {
  if (m > board.size())
    throw std::invalid_argument("top_m_by_positives: m exceeds board size");
  std::vector<std::size_t> idx(board.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (board[a].positives != board[b].positives)
      return board[a].positives > board[b].positives;
    return board[a].item < board[b].item;
  });
  std::vector<std::uint32_t> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(board[idx[i]].item);
  std::sort(out.begin(), out.end());
  return DefectiveSet(p, std::move(out));
}

DefectiveSet any_positive(const ItemScoreBoard& board, std::uint32_t p) {
  std::vector<std::uint32_t> out;
  for (const auto& s : board)
    if (s.positives >= 1) out.push_back(s.item);
  std::sort(out.begin(), out.end());
  return DefectiveSet(p, std::move(out));
}

}  // namespace gt::decode
