#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gt/infotheory.hpp"
#include "gt/rng.hpp"

using namespace gt;
using namespace gt::info;

namespace {
constexpr double kLn2 = std::numbers::ln2;
}

TEST_CASE("binary_entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const double rho = 0.11;
  const double direct = rho * std::log(1 / rho) + (1 - rho) * std::log(1 / (1 - rho));
  CHECK(std::fabs(binary_entropy(rho) - direct) < 1e-12);
  CHECK_THROWS_AS(binary_entropy(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.1), std::invalid_argument);
}

TEST_CASE("binary_kl") {
  CHECK(binary_kl(0.3, 0.3) == doctest::Approx(0.0).epsilon(1e-15));
  // D2(1/2 || rho) = (1/2) log(1/(4 rho (1-rho)))
  const double rho = 0.2;
  const double closed = 0.5 * std::log(1.0 / (4 * rho * (1 - rho)));
  CHECK(std::fabs(binary_kl(0.5, rho) - closed) < 1e-12);
  const double direct =
      0.9 * std::log(0.9 / 0.11) + 0.1 * std::log(0.1 / 0.89);
  CHECK(std::fabs(binary_kl(0.9, 0.11) - direct) < 1e-12);
  CHECK(std::isinf(binary_kl(0.5, 0.0)));
  CHECK(binary_kl(0.0, 0.0) == 0.0);
  CHECK(binary_kl(0.2, 0.1) > 0.0);
}

TEST_CASE("binary_convolution") {
  CHECK(binary_convolution(0.0, 0.37) == doctest::Approx(0.37));
  CHECK(binary_convolution(0.5, 0.99) == doctest::Approx(0.5));
  CHECK(binary_convolution(0.3, 0.2) == doctest::Approx(0.38).epsilon(1e-15));
  CHECK(binary_convolution(0.3, 0.2) == binary_convolution(0.2, 0.3));
}

TEST_CASE("channel_capacity: symmetric closed form") {
  for (double rho : {0.01, 0.11, 0.25, 0.4, 0.49}) {
    const auto cap = channel_capacity(channel_law(Channel::symmetric(rho)));
    CHECK(std::fabs(cap.capacity - (kLn2 - binary_entropy(rho))) < 1e-8);
    CHECK(std::fabs(cap.p_u_star - 0.5) < 1e-4);
  }
}

TEST_CASE("channel_capacity: noiseless and degenerate") {
  CHECK(channel_capacity(channel_law(Channel::noiseless())).capacity ==
        doctest::Approx(kLn2).epsilon(1e-10));
  const auto deg = channel_capacity({0.3, 0.3});
  CHECK(deg.capacity == 0.0);
  CHECK(deg.p_u_star == 0.5);
}

TEST_CASE("channel_capacity: Z channel against closed form and brute force") {
  const double rho = 0.5;
  const auto law = channel_law(Channel::z_channel(rho));
  const auto cap = channel_capacity(law);
  const double closed =
      std::log(1.0 + (1.0 - rho) * std::pow(rho, rho / (1.0 - rho)));
  CHECK(std::fabs(cap.capacity - closed) < 1e-8);

  // Fine-grid brute force as an independent route.
  double best = 0.0;
  for (int i = 1; i < 1000000; ++i)
    best = std::max(best, mutual_information(i * 1e-6, law));
  CHECK(std::fabs(cap.capacity - best) < 1e-8);
}

TEST_CASE("z and reverse-z have the same capacity") {
  for (double rho : {0.1, 0.3, 0.5, 0.8}) {
    const auto cz = channel_capacity(channel_law(Channel::z_channel(rho)));
    const auto crz = channel_capacity(channel_law(Channel::reverse_z(rho)));
    CHECK(std::fabs(cz.capacity - crz.capacity) < 1e-8);
  }
}

TEST_CASE("exact_conditional_mi basics") {
  // ell = k = 1, q = 1/2, identity channel: I = H2(1/2) = log 2.
  DensityContext ctx{1, 1, kLn2, 0.5, channel_law(Channel::noiseless())};
  CHECK(exact_conditional_mi(ctx) == doctest::Approx(kLn2).epsilon(1e-12));

  // q -> 0: constant input carries no information.
  ctx.q_one = 1e-9;
  CHECK(exact_conditional_mi(ctx) < 1e-7);

  // Never exceeds capacity.
  DensityContext sym{5, 3, kLn2, kLn2 / 5,
                     channel_law(Channel::symmetric(0.11))};
  const double cap = channel_capacity(sym.law).capacity;
  CHECK(exact_conditional_mi(sym) <= cap + 1e-12);
  CHECK(exact_conditional_mi(sym) >= 0.0);
}

TEST_CASE("exact vs asymptotic mutual information") {
  const auto law = channel_law(Channel::symmetric(0.11));
  SUBCASE("constant fraction, alpha = 1, k = 500: within 1%") {
    DensityContext ctx{500, 500, kLn2, kLn2 / 500, law};
    const double exact = exact_conditional_mi(ctx);
    const double asym = asymptotic_mi(ctx, MiRegime::ConstantFraction, 1.0);
    CHECK(std::fabs(exact - asym) / exact < 0.01);
  }
  SUBCASE("small fraction, k = 1e5, ell = 100: within 2%") {
    DensityContext ctx{100000, 100, kLn2, kLn2 / 100000, law};
    const double exact = exact_conditional_mi(ctx);
    const double asym = asymptotic_mi(ctx, MiRegime::SmallFraction);
    CHECK(std::fabs(exact - asym) / exact < 0.02);
  }
  SUBCASE("alpha=1, nu=log2 identity: log2 - H2(rho)") {
    DensityContext ctx{500, 500, kLn2, kLn2 / 500, law};
    const double asym = asymptotic_mi(ctx, MiRegime::ConstantFraction, 1.0);
    CHECK(std::fabs(asym - (kLn2 - binary_entropy(0.11))) < 1e-10);
  }
  SUBCASE("small-fraction formula matches its definition") {
    DensityContext ctx{1000, 1, kLn2, kLn2 / 1000, law};
    const double direct = std::exp(-kLn2) * kLn2 * (1.0 / 1000.0) *
                          (1 - 2 * 0.11) * std::log(0.89 / 0.11);
    CHECK(std::fabs(asymptotic_mi(ctx, MiRegime::SmallFraction) - direct) <
          1e-15);
  }
  SUBCASE("non-symmetric law rejected") {
    DensityContext ctx{5, 2, kLn2, 0.1, channel_law(Channel::z_channel(0.3))};
    CHECK_THROWS_AS(asymptotic_mi(ctx, MiRegime::SmallFraction),
                    std::invalid_argument);
  }
}

TEST_CASE("information_density: trivial cases") {
  DensityContext ctx{4, 2, kLn2, 0.2, channel_law(Channel::symmetric(0.11))};
  // saturated conditioning contributes zero
  CHECK(per_test_density(true, true, 1, ctx) == 0.0);
  CHECK(per_test_density(false, true, 0, ctx) == 0.0);
  // empty sum
  CHECK(information_density({}, {}, {}, ctx) == 0.0);
}

TEST_CASE("information_density: single test against exhaustive marginalization") {
  // OR(x_eq)=0, OR(x_dif)=1, y=1 under symmetric noise; oracle marginalizes
  // over all 2^ell values of x_dif explicitly.
  const double rho = 0.11, q = 0.23;
  for (std::uint32_t ell : {1u, 2u, 3u}) {
    DensityContext ctx{5, ell, kLn2, q, channel_law(Channel::symmetric(rho))};
    double p_y1_marginal = 0.0;
    for (std::uint32_t m = 0; m < (1u << ell); ++m) {
      const int w = std::popcount(m);
      const double prob = std::pow(q, w) * std::pow(1 - q, double(ell - w));
      p_y1_marginal += prob * (m != 0 ? 1 - rho : rho);
    }
    const double expect = std::log((1 - rho) / p_y1_marginal);
    const std::uint8_t one = 1, zero = 0;
    const double got = information_density({&one, 1}, {&zero, 1}, {&one, 1}, ctx);
    CHECK(std::fabs(got - expect) < 1e-12);
  }
}

TEST_CASE("information_density: z-channel zero-probability outcome -> -inf") {
  DensityContext ctx{3, 1, kLn2, 0.3, channel_law(Channel::z_channel(0.25))};
  // dif inactive, eq inactive, y = 1 has numerator P(1|U=0) = 0
  CHECK(per_test_density(false, false, 1, ctx) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("empirical density mean matches exact conditional MI") {
  const double rho = 0.11;
  DensityContext ctx{5, 2, kLn2, kLn2 / 5, channel_law(Channel::symmetric(rho))};
  const double target = exact_conditional_mi(ctx);
  Rng rng({99, 0}, "density");
  const int draws = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < draws; ++i) {
    bool dif = false, eq = false;
    for (std::uint32_t j = 0; j < ctx.ell; ++j) dif |= rng.bernoulli(ctx.q_one);
    for (std::uint32_t j = 0; j < ctx.k - ctx.ell; ++j)
      eq |= rng.bernoulli(ctx.q_one);
    const bool u = dif || eq;
    const bool y = rng.bernoulli(ctx.law.p(1, u ? 1 : 0));
    const double d = per_test_density(dif, eq, y ? 1 : 0, ctx);
    sum += d;
    sumsq += d * d;
  }
  const double mean = sum / draws;
  const double var = sumsq / draws - mean * mean;
  const double sigma = std::sqrt(var / draws);
  CHECK(std::fabs(mean - target) < 3.0 * sigma + 1e-9);
}

TEST_CASE("I_ell monotone in ell; ell/I_ell maximized at ell = k") {
  const std::vector<BinaryChannelLaw> laws = {
      channel_law(Channel::noiseless()),
      channel_law(Channel::symmetric(0.11)),
      channel_law(Channel::symmetric(0.3)),
      channel_law(Channel::z_channel(0.3)),
      channel_law(Channel::reverse_z(0.3)),
  };
  for (const auto& law : laws) {
    for (std::uint32_t k : {2u, 5u, 12u, 20u}) {
      double prev = 0.0;
      double best_ratio = 0.0;
      std::uint32_t best_ell = 0;
      for (std::uint32_t ell = 1; ell <= k; ++ell) {
        DensityContext ctx{k, ell, kLn2, kLn2 / k, law};
        const double val = exact_conditional_mi(ctx);
        CHECK(val >= prev - 1e-12);
        prev = val;
        const double ratio = ell / val;
        if (ratio > best_ratio + 1e-12) {
          best_ratio = ratio;
          best_ell = ell;
        }
      }
      CHECK(best_ell == k);
    }
  }
}
