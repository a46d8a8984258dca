#include "gt/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gt::design {

void DesignSpec::validate() const {
  if (population.empty())
    throw std::invalid_argument("DesignSpec: population must be non-empty");
  if (!(q_one > 0.0 && q_one < 1.0))
    throw std::invalid_argument("DesignSpec: need 0 < q_one < 1");
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (population[i] >= p)
      throw std::invalid_argument("DesignSpec: population index out of range");
    if (i > 0 && population[i] <= population[i - 1])
      throw std::invalid_argument("DesignSpec: population must be ascending");
  }
}

std::vector<TestPool> bernoulli_matrix(const DesignSpec& spec,
                                       const SubstreamSource& rows) {
  spec.validate();
  std::vector<TestPool> pools;
  pools.reserve(spec.n);
  const std::size_t m = spec.population.size();
  const bool sparse = spec.q_one < 0.1;
  const double log1mq = std::log1p(-spec.q_one);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Rng rng = rows.at(i);
    TestPool pool(spec.p);
    if (sparse) {
      // Geometric skips between successes; same per-entry Bernoulli law,
      // far fewer draws at low q_one.
      std::size_t pos = 0;
      for (;;) {
        const double u = rng.next_double();
        const auto skip = static_cast<std::size_t>(
            std::floor(std::log1p(-u) / log1mq));
        pos += skip;
        if (pos >= m) break;
        pool.set(spec.population[pos]);
        ++pos;
      }
    } else {
      for (std::size_t j = 0; j < m; ++j)
        if (rng.bernoulli(spec.q_one)) pool.set(spec.population[j]);
    }
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::vector<std::pair<std::uint32_t, TestPool>> individual_plan(
    const std::vector<std::uint32_t>& items, std::uint32_t reps,
    std::uint32_t p) {
  if (reps < 1) throw std::invalid_argument("individual_plan: reps >= 1");
  std::vector<std::uint32_t> sorted = items;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::uint32_t, TestPool>> plan;
  plan.reserve(sorted.size() * reps);
  for (std::uint32_t item : sorted) {
    if (item >= p) throw std::invalid_argument("individual_plan: item out of range");
    for (std::uint32_t r = 0; r < reps; ++r) {
      TestPool pool(p);
      pool.set(item);
      plan.emplace_back(item, std::move(pool));
    }
  }
  return plan;
}

}  // namespace gt::design
