#pragma once

#include <cstdint>
#include <span>

#include "gt/core.hpp"

namespace gt::info {

// All information measures are in nats.  Base-2 values appear only at
// presentation boundaries.

struct BinaryChannelLaw {
  double p1_given_u0 = 0.0;  // P[Y=1 | U=0]
  double p1_given_u1 = 1.0;  // P[Y=1 | U=1]

  double p(std::uint8_t y, std::uint8_t u) const {
    const double p1 = u ? p1_given_u1 : p1_given_u0;
    return y ? p1 : 1.0 - p1;
  }
};

BinaryChannelLaw channel_law(const Channel& ch);

// H2(rho) = rho log(1/rho) + (1-rho) log(1/(1-rho)); endpoints return 0.
double binary_entropy(double rho);

// D2(qp || q); q in {0,1} with mismatched qp yields +infinity.
double binary_kl(double qp, double q);

// a*b = a(1-b) + (1-a)b.
double binary_convolution(double a, double b);

// I(U;Y) for U ~ Bernoulli(p_u1) through the law.
double mutual_information(double p_u1, const BinaryChannelLaw& law);

struct CapacityResult {
  double capacity = 0.0;  // nats
  double p_u_star = 0.5;  // maximizing P[U=1]
};

// 1-D concave maximization of I(U;Y) over P[U=1], argument tolerance 1e-10.
// A degenerate law (identical rows) returns {0, 0.5}.
CapacityResult channel_capacity(const BinaryChannelLaw& law);

// Parameters of the i.i.d. Bernoulli design the densities are computed
// against: k assumed defectives split into ell = |S_dif| and k - ell
// = |S_eq|, with per-test inclusion probability q_one (= nu/k or nu/kmax).
struct DensityContext {
  std::uint32_t k = 1;
  std::uint32_t ell = 1;
  double nu = 0.0;
  double q_one = 0.5;
  BinaryChannelLaw law;

  void validate() const;
};

// I_ell = I(X_sdif; Y | X_seq) under the i.i.d. design, exactly:
// conditioned on an active item in S_eq the output ignores X_sdif, so
// I_ell = (1-q_one)^(k-ell) * I(Bern(q1); law) with q1 = 1-(1-q_one)^ell.
double exact_conditional_mi(const DensityContext& ctx);

enum class MiRegime { SmallFraction, ConstantFraction };

// Leading-order I_ell for the symmetric channel.
//   SmallFraction    : e^-nu * nu * (ell/k) * (1-2rho) * log((1-rho)/rho)
//   ConstantFraction : e^-(1-alpha)nu * (H2(e^-alpha*nu * rho) - H2(rho))
// alpha < 0 means "use ell/k from the context".
double asymptotic_mi(const DensityContext& ctx, MiRegime regime,
                     double alpha = -1.0);

// Per-test information density.  The restricted rows enter only through
// their boolean OR, so callers pass, per test, whether any S_dif item and
// any S_eq item is included.  Zero-probability outcomes produce -infinity
// (threshold decoders treat that as automatic failure).
double per_test_density(bool dif_active, bool eq_active, std::uint8_t y,
                        const DensityContext& ctx);

// Sum of per_test_density over tests; n = 0 gives 0.
double information_density(std::span<const std::uint8_t> dif_active,
                           std::span<const std::uint8_t> eq_active,
                           std::span<const std::uint8_t> outcomes,
                           const DensityContext& ctx);

}  // namespace gt::info
