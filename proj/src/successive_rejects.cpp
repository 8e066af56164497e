#include <cmath>
#include <numeric>
#include <optional>

#include "molte/error.hpp"
#include "molte/policies.hpp"

namespace molte {
namespace {

__extension__ typedef __int128 i128;

i128 gcd128(i128 a, i128 b) {
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// log_bar(M) = 1/2 + sum_{i=2}^M 1/i as an exact fraction, when it fits.
std::optional<std::pair<i128, i128>> log_bar_fraction(std::size_t arms) {
  i128 num = 1, den = 2;
  for (std::size_t i = 2; i <= arms; ++i) {
    const auto ii = static_cast<i128>(i);
    i128 a = 0, b = 0, d = 0;
    if (__builtin_mul_overflow(num, ii, &a) || __builtin_mul_overflow(den, ii, &d) || __builtin_add_overflow(a, den, &b)) {
      return std::nullopt;
    }
    const i128 g = gcd128(b, d);
    num = b / g;
    den = d / g;
  }
  return std::make_pair(num, den);
}

}  // namespace

double sr_log_bar(std::size_t arms) {
  if (arms < 2) throw InvalidArgument("successive rejects needs at least two arms");
  double s = 0.5;
  for (std::size_t i = 2; i <= arms; ++i) s += 1.0 / static_cast<double>(i);
  return s;
}

std::vector<std::size_t> sr_schedule(std::size_t arms, std::size_t budget) {
  if (arms < 2) throw InvalidArgument("successive rejects needs at least two arms");
  if (budget < arms) throw InvalidArgument("successive rejects needs a budget of at least one pull per arm");
  const std::size_t spare = budget - arms;
  std::vector<std::size_t> n(arms - 1);
  const auto frac = log_bar_fraction(arms);
  for (std::size_t k = 1; k < arms; ++k) {
    const std::size_t survivors = arms + 1 - k;
    bool exact = false;
    if (frac) {
      // ceil(spare * den / (num * survivors)) in integers.
      i128 top = 0, bottom = 0;
      if (!__builtin_mul_overflow(static_cast<i128>(spare), frac->second, &top) &&
          !__builtin_mul_overflow(frac->first, static_cast<i128>(survivors), &bottom)) {
        n[k - 1] = static_cast<std::size_t>((top + bottom - 1) / bottom);
        exact = true;
      }
    }
    if (!exact) {
      long double lb = 0.5L;
      for (std::size_t i = 2; i <= arms; ++i) lb += 1.0L / static_cast<long double>(i);
      n[k - 1] = static_cast<std::size_t>(std::ceil(static_cast<long double>(spare) / (lb * survivors)));
    }
  }
  return n;
}

std::size_t sr_total_pulls(std::size_t arms, std::span<const std::size_t> schedule) {
  if (schedule.size() + 1 != arms) throw InvalidArgument("schedule length must be M - 1");
  std::size_t total = 0, previous = 0;
  for (std::size_t k = 1; k < arms; ++k) {
    total += (arms + 1 - k) * (schedule[k - 1] - previous);
    previous = schedule[k - 1];
  }
  return total;
}

}  // namespace molte
