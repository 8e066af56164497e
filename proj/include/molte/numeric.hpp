#pragma once

#include <cstddef>
#include <span>

namespace molte {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal distribution function, accurate in both tails.
double normal_cdf(double z);

/// f(z) = z * Phi(z) + phi(z), the expected positive part of (z + Z) for a
/// standard normal Z. Evaluated without cancellation for very negative z.
double kg_f(double z);

/// Index of the largest element; lowest index wins ties and NaN entries
/// are skipped. Returns size() when every entry is NaN or the span is empty.
std::size_t argmax(std::span<const double> values);

/// Index of the smallest element with the same tie and NaN rules as argmax.
std::size_t argmin(std::span<const double> values);

}  // namespace molte
