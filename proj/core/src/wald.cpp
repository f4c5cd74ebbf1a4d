#include "rarexact/wald.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rarexact/numerics.hpp"

namespace rarexact {

double wald_statistic(const TrialState& x) {
  if (x.n_c <= 0 || x.n_d <= 0) throw std::domain_error("wald_statistic: zero group size");
  const std::int64_t nc = x.n_c, nd = x.n_d;
  const std::int64_t diff = static_cast<std::int64_t>(x.s_d) * nc - static_cast<std::int64_t>(x.s_c) * nd;
  if (diff == 0) return 0.0;
  const std::int64_t den = static_cast<std::int64_t>(x.s_c) * x.failures_c() * nd * nd * nd +
                           static_cast<std::int64_t>(x.s_d) * x.failures_d() * nc * nc * nc;
  const double sign = diff > 0 ? 1.0 : -1.0;
  if (den == 0) return sign * std::numeric_limits<double>::infinity();
  std::int64_t num = diff * diff;
  std::int64_t d = den;
  std::int64_t g = std::gcd(num, d);
  num /= g;
  d /= g;
  // Multiply in n_C n_D after reducing to keep num inside int64 for n <= 1000.
  std::int64_t m = nc * nd;
  g = std::gcd(m, d);
  m /= g;
  d /= g;
  const __int128 full = static_cast<__int128>(num) * m;
  return sign * std::sqrt(static_cast<double>(full) / static_cast<double>(d));
}

double wald_critical_value(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha outside (0,1)");
  return normal_quantile(1.0 - alpha / 2.0);
}

bool asymptotic_reject(const TrialState& x, double alpha) {
  return std::abs(wald_statistic(x)) >= wald_critical_value(alpha);
}

}  // namespace rarexact
