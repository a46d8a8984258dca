#include "gt/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace gt {

Channel Channel::symmetric(double rho) {
  if (!(rho > 0.0 && rho < 0.5))
    throw std::invalid_argument("symmetric channel requires rho in (0, 1/2)");
  return {ChannelKind::Symmetric, rho};
}

Channel Channel::z_channel(double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("Z channel requires rho in (0, 1)");
  return {ChannelKind::ZChannel, rho};
}

Channel Channel::reverse_z(double rho) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("reverse Z channel requires rho in (0, 1)");
  return {ChannelKind::ReverseZ, rho};
}

std::string Channel::name() const {
  switch (kind) {
    case ChannelKind::Noiseless: return "noiseless";
    case ChannelKind::Symmetric: return "symmetric";
    case ChannelKind::ZChannel: return "z";
    case ChannelKind::ReverseZ: return "reverse_z";
  }
  return "?";
}

DefectiveSet::DefectiveSet(std::uint32_t p_, std::vector<std::uint32_t> items_)
    : p(p_), items(std::move(items_)) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] >= p) throw std::invalid_argument("item index out of range");
    if (i > 0 && items[i] <= items[i - 1])
      throw std::invalid_argument("items must be strictly increasing");
  }
}

bool DefectiveSet::contains(std::uint32_t item) const {
  return std::binary_search(items.begin(), items.end(), item);
}

DefectiveSet set_union(const DefectiveSet& a, const DefectiveSet& b) {
  if (a.p != b.p) throw std::invalid_argument("set_union: population mismatch");
  std::vector<std::uint32_t> out;
  out.reserve(a.items.size() + b.items.size());
  std::set_union(a.items.begin(), a.items.end(), b.items.begin(),
                 b.items.end(), std::back_inserter(out));
  return DefectiveSet(a.p, std::move(out));
}

CardinalitySpec CardinalitySpec::range(std::uint32_t kmin, std::uint32_t kmax) {
  if (kmin < 1 || kmin > kmax)
    throw std::invalid_argument("range spec requires 1 <= kmin <= kmax");
  return {kmin, kmax};
}

void CardinalitySpec::validate(std::uint32_t p) const {
  if (kmin > kmax || kmax > p)
    throw std::invalid_argument("cardinality spec out of range for population");
}

namespace {

// Uniform k-subset of [0, p) via Floyd's algorithm, then sorted.
std::vector<std::uint32_t> sample_k_subset(std::uint32_t p, std::uint32_t k,
                                           Rng& rng) {
  std::set<std::uint32_t> chosen;
  for (std::uint32_t j = p - k; j < p; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.below(j + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

DefectiveSet sample_defective_set(std::uint32_t p, const CardinalitySpec& spec,
                                  Rng& rng) {
  spec.validate(p);
  std::uint32_t k = spec.kmin;
  if (!spec.is_exact()) {
    // Weight each admissible cardinality by its number of sets.
    std::vector<double> w;
    double wmax = -1e300;
    for (std::uint32_t c = spec.kmin; c <= spec.kmax; ++c) {
      w.push_back(log_binomial(p, c));
      wmax = std::max(wmax, w.back());
    }
    double total = 0.0;
    for (double& x : w) {
      x = std::exp(x - wmax);
      total += x;
    }
    double u = rng.next_double() * total;
    std::uint32_t idx = 0;
    while (idx + 1 < w.size() && u >= w[idx]) u -= w[idx], ++idx;
    k = spec.kmin + idx;
  }
  if (k == 0) return DefectiveSet(p, {});
  return DefectiveSet(p, sample_k_subset(p, k, rng));
}

std::uint8_t run_test(const TestPool& pool, const DefectiveSet& s,
                      const Channel& ch, Rng& rng) {
  if (pool.size() != s.p)
    throw std::invalid_argument("run_test: pool length differs from population");
  bool u = false;
  for (std::uint32_t item : s.items) {
    if (pool.get(item)) {
      u = true;
      break;
    }
  }
  switch (ch.kind) {
    case ChannelKind::Noiseless:
      return u ? 1 : 0;
    case ChannelKind::Symmetric:
      return static_cast<std::uint8_t>(u ^ rng.bernoulli(ch.rho));
    case ChannelKind::ZChannel:
      if (!u) return 0;
      return rng.bernoulli(ch.rho) ? 0 : 1;
    case ChannelKind::ReverseZ:
      if (u) return 1;
      return rng.bernoulli(ch.rho) ? 1 : 0;
  }
  return 0;
}

std::uint32_t distance(const DefectiveSet& s, const DefectiveSet& shat) {
  if (s.p != shat.p) throw std::invalid_argument("distance: population mismatch");
  std::size_t overlap = 0;
  auto it = shat.items.begin();
  for (std::uint32_t item : s.items) {
    while (it != shat.items.end() && *it < item) ++it;
    if (it != shat.items.end() && *it == item) ++overlap;
  }
  const std::size_t miss = s.items.size() - overlap;
  const std::size_t extra = shat.items.size() - overlap;
  return static_cast<std::uint32_t>(std::max(miss, extra));
}

}  // namespace gt
