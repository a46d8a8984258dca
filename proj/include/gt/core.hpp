#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gt/bitvec.hpp"
#include "gt/rng.hpp"

namespace gt {

using TestPool = BitVec;

enum class ChannelKind { Noiseless, Symmetric, ZChannel, ReverseZ };

// Binary observation law applied to the boolean OR of the tested items.
//   Noiseless : y = u
//   Symmetric : y = u xor Bernoulli(rho), rho in (0, 1/2)
//   ZChannel  : flips 1 -> 0 with probability rho; 0 is never corrupted
//   ReverseZ  : flips 0 -> 1 with probability rho; 1 is never corrupted
struct Channel {
  ChannelKind kind = ChannelKind::Noiseless;
  double rho = 0.0;

  static Channel noiseless() { return {ChannelKind::Noiseless, 0.0}; }
  static Channel symmetric(double rho);
  static Channel z_channel(double rho);
  static Channel reverse_z(double rho);

  std::string name() const;
};

// Sorted, duplicate-free item indices in [0, p).
struct DefectiveSet {
  std::uint32_t p = 0;
  std::vector<std::uint32_t> items;  // strictly increasing

  DefectiveSet() = default;
  DefectiveSet(std::uint32_t p, std::vector<std::uint32_t> items);

  std::size_t size() const { return items.size(); }
  bool contains(std::uint32_t item) const;
  bool operator==(const DefectiveSet& o) const {
    return p == o.p && items == o.items;
  }
};

DefectiveSet set_union(const DefectiveSet& a, const DefectiveSet& b);

// Either an exact defective count or an inclusive range of counts.
struct CardinalitySpec {
  std::uint32_t kmin = 0;
  std::uint32_t kmax = 0;

  static CardinalitySpec exact(std::uint32_t k) { return {k, k}; }
  static CardinalitySpec range(std::uint32_t kmin, std::uint32_t kmax);

  bool is_exact() const { return kmin == kmax; }
  void validate(std::uint32_t p) const;
};

struct Transcript {
  std::vector<std::pair<TestPool, std::uint8_t>> entries;
  std::vector<std::pair<std::string, std::size_t>> stage_marks;

  std::size_t total_tests() const { return entries.size(); }
  void mark_stage(std::string name) {
    stage_marks.emplace_back(std::move(name), entries.size());
  }
};

// Uniform over all admissible sets.  For a range spec the cardinality is
// chosen with probability proportional to the number of sets of that size,
// so the draw is uniform over the union, not uniform over cardinalities.
DefectiveSet sample_defective_set(std::uint32_t p, const CardinalitySpec& spec,
                                  Rng& rng);

// One test: U = OR of pool entries over s, then Y = channel(U).
std::uint8_t run_test(const TestPool& pool, const DefectiveSet& s,
                      const Channel& ch, Rng& rng);

// max{|s \ shat|, |shat \ s|}; zero iff exact recovery.
std::uint32_t distance(const DefectiveSet& s, const DefectiveSet& shat);

}  // namespace gt
