#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gt/core.hpp"
#include "gt/rng.hpp"

namespace gt::design {

// Non-adaptive Bernoulli design over a sub-population of [0, p).
struct DesignSpec {
  std::uint32_t p = 0;
  std::size_t n = 0;
  std::vector<std::uint32_t> population;  // ascending indices < p
  double q_one = 0.5;

  void validate() const;
};

// n pools of length p; entries outside the population stay 0, entries
// inside are i.i.d. Bernoulli(q_one).  Row i draws only from rows.at(i),
// so matrices with a common prefix of rows stay identical when n grows.
std::vector<TestPool> bernoulli_matrix(const DesignSpec& spec,
                                       const SubstreamSource& rows);

// reps singleton pools per item, grouped by ascending item then repetition.
std::vector<std::pair<std::uint32_t, TestPool>> individual_plan(
    const std::vector<std::uint32_t>& items, std::uint32_t reps,
    std::uint32_t p);

}  // namespace gt::design
