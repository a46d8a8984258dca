#include "gt/infotheory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gt::info {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BinaryChannelLaw channel_law(const Channel& ch) {
  switch (ch.kind) {
    case ChannelKind::Noiseless: return {0.0, 1.0};
    case ChannelKind::Symmetric: return {ch.rho, 1.0 - ch.rho};
    case ChannelKind::ZChannel: return {0.0, 1.0 - ch.rho};
    case ChannelKind::ReverseZ: return {ch.rho, 1.0};
  }
  return {0.0, 1.0};
}

double binary_entropy(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("binary_entropy: rho must be in [0,1]");
  if (rho == 0.0 || rho == 1.0) return 0.0;
  return -rho * std::log(rho) - (1.0 - rho) * std::log(1.0 - rho);
}

double binary_kl(double qp, double q) {
  if (!(qp >= 0.0 && qp <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("binary_kl: arguments must be in [0,1]");
  if (q == 0.0) return qp == 0.0 ? 0.0 : kInf;
  if (q == 1.0) return qp == 1.0 ? 0.0 : kInf;
  double d = 0.0;
  if (qp > 0.0) d += qp * std::log(qp / q);
  if (qp < 1.0) d += (1.0 - qp) * std::log((1.0 - qp) / (1.0 - q));
  return d;
}

double binary_convolution(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw std::invalid_argument("binary_convolution: arguments must be in [0,1]");
  return a * (1.0 - b) + (1.0 - a) * b;
}

double mutual_information(double p_u1, const BinaryChannelLaw& law) {
  const double py1 =
      (1.0 - p_u1) * law.p1_given_u0 + p_u1 * law.p1_given_u1;
  return binary_entropy(py1) - (1.0 - p_u1) * binary_entropy(law.p1_given_u0) -
         p_u1 * binary_entropy(law.p1_given_u1);
}

CapacityResult channel_capacity(const BinaryChannelLaw& law) {
  if (std::fabs(law.p1_given_u0 - law.p1_given_u1) < 1e-15)
    return {0.0, 0.5};
  // Golden-section search; I(U;Y) is concave in P[U=1].
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = mutual_information(x1, law);
  double f2 = mutual_information(x2, law);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = mutual_information(x2, law);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = mutual_information(x1, law);
    }
  }
  const double p = 0.5 * (lo + hi);
  return {mutual_information(p, law), p};
}

void DensityContext::validate() const {
  if (ell < 1 || ell > k)
    throw std::invalid_argument("DensityContext: need 1 <= ell <= k");
  if (!(q_one > 0.0 && q_one < 1.0))
    throw std::invalid_argument("DensityContext: need 0 < q_one < 1");
}

double exact_conditional_mi(const DensityContext& ctx) {
  ctx.validate();
  const double log1mq = std::log1p(-ctx.q_one);
  const double p_eq_silent = std::exp((ctx.k - ctx.ell) * log1mq);
  const double q1 = -std::expm1(ctx.ell * log1mq);  // 1 - (1-q)^ell
  return p_eq_silent * mutual_information(q1, ctx.law);
}

double asymptotic_mi(const DensityContext& ctx, MiRegime regime, double alpha) {
  ctx.validate();
  // Symmetric channel only: rho = P[Y=1|U=0] = 1 - P[Y=1|U=1].
  const double rho = ctx.law.p1_given_u0;
  if (std::fabs(ctx.law.p1_given_u1 - (1.0 - rho)) > 1e-12 || rho <= 0.0 ||
      rho >= 0.5)
    throw std::invalid_argument("asymptotic_mi: symmetric channel only");
  const double nu = ctx.nu;
  switch (regime) {
    case MiRegime::SmallFraction: {
      const double frac = static_cast<double>(ctx.ell) / ctx.k;
      return std::exp(-nu) * nu * frac * (1.0 - 2.0 * rho) *
             std::log((1.0 - rho) / rho);
    }
    case MiRegime::ConstantFraction: {
      const double a =
          alpha < 0.0 ? static_cast<double>(ctx.ell) / ctx.k : alpha;
      const double conv = binary_convolution(std::exp(-a * nu), rho);
      return std::exp(-(1.0 - a) * nu) *
             (binary_entropy(conv) - binary_entropy(rho));
    }
  }
  return 0.0;
}

double per_test_density(bool dif_active, bool eq_active, std::uint8_t y,
                        const DensityContext& ctx) {
  if (eq_active) return 0.0;  // conditioning saturates the OR
  const double log1mq = std::log1p(-ctx.q_one);
  const double q1 = -std::expm1(ctx.ell * log1mq);
  const double num = ctx.law.p(y, dif_active ? 1 : 0);
  const double den = q1 * ctx.law.p(y, 1) + (1.0 - q1) * ctx.law.p(y, 0);
  if (num == 0.0) return -kInf;
  if (den == 0.0) return kInf;
  return std::log(num / den);
}

double information_density(std::span<const std::uint8_t> dif_active,
                           std::span<const std::uint8_t> eq_active,
                           std::span<const std::uint8_t> outcomes,
                           const DensityContext& ctx) {
  ctx.validate();
  const std::size_t n = outcomes.size();
  if (dif_active.size() != n || eq_active.size() != n)
    throw std::invalid_argument("information_density: row count mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sum += per_test_density(dif_active[i] != 0, eq_active[i] != 0, outcomes[i],
                            ctx);
  return sum;
}

}  // namespace gt::info
