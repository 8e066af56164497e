#include "molte/numeric.hpp"

#include <cmath>

namespace molte {

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double kg_f(double z) {
  if (z >= 0.0) {
    return z * normal_cdf(z) + normal_pdf(z);
  }
  const double a = -z;
  if (a < 8.0) {
    return normal_pdf(a) - a * normal_cdf(-a);
  }
  // Asymptotic expansion of phi(a) - a * Phi(-a) = phi(a) / a^2 * (1 - 3/a^2 + 15/a^4 - ...).
  const double inv2 = 1.0 / (a * a);
  const double series = 1.0 - 3.0 * inv2 + 15.0 * inv2 * inv2 - 105.0 * inv2 * inv2 * inv2 +
                        945.0 * inv2 * inv2 * inv2 * inv2;
  return normal_pdf(a) * inv2 * series;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    if (best == values.size() || values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmin(std::span<const double> values) {
  std::size_t best = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    if (best == values.size() || values[i] < values[best]) best = i;
  }
  return best;
}

}  // namespace molte
