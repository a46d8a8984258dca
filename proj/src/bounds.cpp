#include "gt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gt/infotheory.hpp"

namespace gt::bounds {

namespace {
constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_theta_rho(double theta, double rho, double rho_hi) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("theta must lie in (0,1)");
  if (!(rho > 0.0 && rho < rho_hi))
    throw std::invalid_argument("rho out of range");
}

double t_of(double theta) { return theta / (1.0 - theta); }

double z_capacity(double rho) {
  return info::channel_capacity(info::channel_law(Channel::z_channel(rho)))
      .capacity;
}

}  // namespace

std::string to_string(RateSource s) {
  switch (s) {
    case RateSource::ConverseSym: return "converse_sym";
    case RateSource::AchSimple: return "ach_simple";
    case RateSource::AchPractical: return "ach_practical";
    case RateSource::AchRefined: return "ach_refined";
    case RateSource::CapacityConverse: return "capacity_converse";
    case RateSource::ZAch: return "z_ach";
    case RateSource::ReverseZConverse: return "reverse_z_converse";
    case RateSource::Noiseless: return "noiseless";
  }
  return "?";
}

RateSource rate_source_from_string(const std::string& name) {
  for (RateSource s : all_rate_sources())
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown rate source: " + name);
}

std::vector<RateSource> all_rate_sources() {
  return {RateSource::ConverseSym,      RateSource::AchSimple,
          RateSource::AchPractical,     RateSource::AchRefined,
          RateSource::CapacityConverse, RateSource::ZAch,
          RateSource::ReverseZConverse, RateSource::Noiseless};
}

RatePoint converse_rate_symmetric(double theta, double rho) {
  check_theta_rho(theta, rho, 0.5);
  const double first = kLn2 / (kLn2 - info::binary_entropy(rho));
  const double second = t_of(theta) * kLn2 / std::log((1.0 - rho) / rho);
  return {theta, rho, RateSource::ConverseSym, std::max(first, second)};
}

RatePoint ach_rate_simple(double theta, double rho) {
  check_theta_rho(theta, rho, 0.5);
  const double first = kLn2 / (kLn2 - info::binary_entropy(rho));
  const double second = t_of(theta) * kLn2 / info::binary_kl(0.5, rho);
  return {theta, rho, RateSource::AchSimple, first + second};
}

RatePoint ach_rate_practical(double theta, double rho) {
  check_theta_rho(theta, rho, 0.5);
  const double first = 1.0 / (kLn2 - info::binary_entropy(rho));
  const double second = t_of(theta) * kLn2 / info::binary_kl(0.5, rho);
  return {theta, rho, RateSource::AchPractical, first + second};
}

double refined_rate_at(double theta, double rho, double gamma, double delta2) {
  const double t = t_of(theta);
  const double one_minus_2rho = 1.0 - 2.0 * rho;
  const double log_ratio = std::log((1.0 - rho) / rho);
  const double mi1 = kLn2 / (kLn2 - info::binary_entropy(rho));
  const double mi2 = 2.0 * (1.0 + 2.0 * (1.0 - gamma) * t) /
                     (one_minus_2rho * log_ratio * (1.0 - delta2));
  const double conc = 4.0 * (1.0 + delta2 * one_minus_2rho / 3.0) *
                      (1.0 - gamma) * t /
                      (delta2 * delta2 * one_minus_2rho * one_minus_2rho);
  const double indiv =
      gamma * t * kLn2 / (one_minus_2rho * log_ratio);  // D2(rho || 1-rho)
  return std::max({mi1, mi2, conc}) + indiv;
}

RatePoint ach_rate_refined(double theta, double rho) {
  check_theta_rho(theta, rho, 0.5);
  constexpr int kGrid = 400;
  double best = kInf, best_g = 0.5, best_d = 0.5;
  for (int i = 0; i < kGrid; ++i) {
    const double g = (i + 0.5) / kGrid;
    for (int j = 0; j < kGrid; ++j) {
      const double d = (j + 0.5) / kGrid;
      const double r = refined_rate_at(theta, rho, g, d);
      if (r < best) {
        best = r;
        best_g = g;
        best_d = d;
      }
    }
  }
  // Coordinate golden-section refinement inside the winning neighbourhood.
  const double cell = 1.0 / kGrid;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double g = best_g, d = best_d;
  for (int round = 0; round < 60; ++round) {
    const double before = best;
    for (int coord = 0; coord < 2; ++coord) {
      double lo = std::max(1e-9, (coord == 0 ? g : d) - cell);
      double hi = std::min(1.0 - 1e-9, (coord == 0 ? g : d) + cell);
      auto eval = [&](double x) {
        return coord == 0 ? refined_rate_at(theta, rho, x, d)
                          : refined_rate_at(theta, rho, g, x);
      };
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      double f1 = eval(x1), f2 = eval(x2);
      while (hi - lo > 1e-12) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = eval(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = eval(x2);
        }
      }
      const double x = 0.5 * (lo + hi);
      const double fx = eval(x);
      if (fx < best) {
        best = fx;
        (coord == 0 ? g : d) = x;
      }
    }
    if (before - best < 1e-6) break;
  }
  return {theta, rho, RateSource::AchRefined, best};
}

RatePoint capacity_converse_rate(double theta, const Channel& channel) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("theta must lie in (0,1)");
  const double c =
      info::channel_capacity(info::channel_law(channel)).capacity;
  if (c <= 0.0) throw std::invalid_argument("degenerate channel has no rate");
  return {theta, channel.rho, RateSource::CapacityConverse, kLn2 / c};
}

RatePoint reverse_z_converse_rate(double theta, double rho) {
  check_theta_rho(theta, rho, 1.0);
  const double first = kLn2 / z_capacity(rho);
  const double second = t_of(theta) * kLn2 / std::log(1.0 / rho);
  return {theta, rho, RateSource::ReverseZConverse, std::max(first, second)};
}

RatePoint z_achievability_rate(double theta, double rho) {
  check_theta_rho(theta, rho, 1.0);
  return {theta, rho, RateSource::ZAch, kLn2 / z_capacity(rho)};
}

RatePoint evaluate_rate(RateSource source, double theta, double rho) {
  switch (source) {
    case RateSource::ConverseSym: return converse_rate_symmetric(theta, rho);
    case RateSource::AchSimple: return ach_rate_simple(theta, rho);
    case RateSource::AchPractical: return ach_rate_practical(theta, rho);
    case RateSource::AchRefined: return ach_rate_refined(theta, rho);
    case RateSource::CapacityConverse:
      return capacity_converse_rate(theta, Channel::symmetric(rho));
    case RateSource::ZAch: return z_achievability_rate(theta, rho);
    case RateSource::ReverseZConverse:
      return reverse_z_converse_rate(theta, rho);
    case RateSource::Noiseless:
      return {theta, rho, RateSource::Noiseless, 1.0};
  }
  throw std::invalid_argument("unknown rate source");
}

std::vector<RatePoint> emit_curves(double rho,
                                   std::span<const double> theta_grid,
                                   std::span<const RateSource> sources) {
  std::vector<RatePoint> out;
  out.reserve(theta_grid.size() * sources.size());
  for (double theta : theta_grid)
    for (RateSource s : sources) out.push_back(evaluate_rate(s, theta, rho));
  return out;
}

void write_curves_csv(std::ostream& os, std::span<const RatePoint> points) {
  os << "theta,rho,source,rate\n";
  char buf[64];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof buf, "%.11e", pt.theta);
    os << buf << ',';
    std::snprintf(buf, sizeof buf, "%.11e", pt.rho);
    os << buf << ',' << to_string(pt.source) << ',';
    std::snprintf(buf, sizeof buf, "%.11e", pt.rate);
    os << buf << '\n';
  }
}

std::vector<double> uniform_theta_grid(std::size_t count) {
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = static_cast<double>(i + 1) / (count + 1);
  return grid;
}

// --- change-of-measure enumeration -------------------------------------

AdaptiveStrategy individual_strategy(std::uint32_t p) {
  return [p](std::span<const std::uint8_t> history) {
    TestPool pool(p);
    pool.set(history.size() % p);
    return pool;
  };
}

AdaptiveStrategy adaptive_split_strategy(std::uint32_t p) {
  // Replays the history: start from the left half; a positive outcome
  // halves the current window, a negative one advances it.
  return [p](std::span<const std::uint8_t> history) {
    std::uint32_t lo = 0, len = std::max(p / 2, 1u);
    for (std::uint8_t y : history) {
      if (y) {
        len = std::max(len / 2, 1u);
      } else {
        lo = (lo + len) % p;
        len = std::max(len, 1u);
      }
    }
    TestPool pool(p);
    for (std::uint32_t i = 0; i < len; ++i) pool.set((lo + i) % p);
    return pool;
  };
}

AdaptiveStrategy fixed_pairs_strategy(std::uint32_t p) {
  return [p](std::span<const std::uint8_t> history) {
    const std::uint32_t pairs = p / 2;
    const std::uint32_t idx = history.size() % std::max(pairs, 1u);
    TestPool pool(p);
    pool.set((2 * idx) % p);
    pool.set((2 * idx + 1) % p);
    return pool;
  };
}

namespace {

struct ComContext {
  std::uint32_t n = 0;
  double exponent_cap = 0.0;  // (1+2eps) n / k
  double ratio = 0.0;         // rho/(1-rho) or rho
  info::BinaryChannelLaw law;
  const AdaptiveStrategy* strategy = nullptr;
  std::vector<std::uint32_t> s_items;
  ChangeOfMeasureReport report;
};

// DFS over outcome prefixes; probs[0] tracks P_S, probs[1+j] tracks
// P_{S \ {j}}, alone[j] counts tests where item j is the only defective.
void com_dfs(ComContext& ctx, std::vector<std::uint8_t>& history,
             std::vector<double>& probs, std::vector<std::uint32_t>& alone) {
  if (history.size() == ctx.n) {
    ++ctx.report.outcome_sequences;
    const double rhs_factor = std::pow(ctx.ratio, ctx.exponent_cap);
    for (std::size_t j = 0; j < ctx.s_items.size(); ++j) {
      if (alone[j] > ctx.exponent_cap) continue;
      ++ctx.report.pairs_checked;
      const double lhs = probs[1 + j];
      const double rhs = probs[0] * rhs_factor;
      const double margin = lhs - rhs;
      ctx.report.min_margin = std::min(ctx.report.min_margin, margin);
      if (margin < -1e-12 * std::max(rhs, 1e-300)) ++ctx.report.violations;
    }
    return;
  }
  const TestPool pool = (*ctx.strategy)(history);
  {
    const TestPool again = (*ctx.strategy)(history);
    if (!(pool == again))
      throw std::invalid_argument(
          "verify_change_of_measure: strategy must be deterministic");
  }
  const std::size_t k = ctx.s_items.size();
  std::uint32_t included = 0;
  std::int32_t only = -1;
  for (std::size_t j = 0; j < k; ++j) {
    if (pool.get(ctx.s_items[j])) {
      ++included;
      only = static_cast<std::int32_t>(j);
    }
  }
  for (std::uint8_t y = 0; y <= 1; ++y) {
    std::vector<double> next(probs);
    next[0] *= ctx.law.p(y, included > 0 ? 1 : 0);
    for (std::size_t j = 0; j < k; ++j) {
      const bool u_without_j =
          included > (pool.get(ctx.s_items[j]) ? 1u : 0u);
      next[1 + j] *= ctx.law.p(y, u_without_j ? 1 : 0);
    }
    if (included == 1) ++alone[only];
    history.push_back(y);
    com_dfs(ctx, history, next, alone);
    history.pop_back();
    if (included == 1) --alone[only];
  }
}

}  // namespace

ChangeOfMeasureReport verify_change_of_measure(
    std::uint32_t p, std::uint32_t k, double rho,
    const AdaptiveStrategy& strategy, std::uint32_t n, double epsilon,
    ComVariant variant) {
  if (n > 20)
    throw std::invalid_argument("verify_change_of_measure: n must be <= 20");
  if (k < 1 || k > p)
    throw std::invalid_argument("verify_change_of_measure: bad k");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("verify_change_of_measure: epsilon in (0, 1/2)");

  ComContext ctx;
  ctx.n = n;
  ctx.exponent_cap = (1.0 + 2.0 * epsilon) * n / k;
  if (variant == ComVariant::Symmetric) {
    if (!(rho > 0.0 && rho < 0.5))
      throw std::invalid_argument("symmetric variant needs rho in (0, 1/2)");
    ctx.ratio = rho / (1.0 - rho);
    ctx.law = info::channel_law(Channel::symmetric(rho));
  } else {
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("reverse-Z variant needs rho in (0, 1)");
    ctx.ratio = rho;
    ctx.law = info::channel_law(Channel::reverse_z(rho));
  }
  ctx.strategy = &strategy;
  ctx.report.min_margin = kInf;

  std::vector<std::uint32_t> comb(k);
  for (std::uint32_t i = 0; i < k; ++i) comb[i] = i;
  bool more = true;
  while (more) {
    ctx.s_items = comb;
    std::vector<std::uint8_t> history;
    std::vector<double> probs(1 + k, 1.0);
    std::vector<std::uint32_t> alone(k, 0);
    com_dfs(ctx, history, probs, alone);
    // next combination
    std::int64_t i = static_cast<std::int64_t>(k) - 1;
    while (i >= 0 && comb[i] == p - k + i) --i;
    if (i < 0) {
      more = false;
    } else {
      ++comb[i];
      for (auto j = static_cast<std::uint32_t>(i + 1); j < k; ++j)
        comb[j] = comb[j - 1] + 1;
    }
  }
  if (!std::isfinite(ctx.report.min_margin)) ctx.report.min_margin = 0.0;
  return ctx.report;
}

}  // namespace gt::bounds
