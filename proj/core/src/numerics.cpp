#include "rarexact/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace rarexact {

namespace {

constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

// Stirling correction ln Γ(x) - [(x - 1/2) ln x - x + ln √(2π)] for x >= 10.
double stirling_correction(double x) {
  static constexpr double kCoef[] = {1.0 / 12.0,         -1.0 / 360.0,   1.0 / 1260.0,
                                     -1.0 / 1680.0,      1.0 / 1188.0,   -691.0 / 360360.0,
                                     1.0 / 156.0,        -3617.0 / 122400.0};
  const double r = 1.0 / x;
  const double r2 = r * r;
  double acc = 0.0;
  for (int i = 7; i >= 0; --i) acc = acc * r2 + kCoef[i];
  return acc * r;
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("log_beta: nonpositive argument");
  const double p = std::min(a, b);
  const double q = std::max(a, b);
  if (p >= 10.0) {
    const double corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(p + q);
    return -0.5 * std::log(q) + kLnSqrt2Pi + corr + (p - 0.5) * std::log(p / (p + q)) +
           q * std::log1p(-p / (p + q));
  }
  if (q >= 10.0) {
    const double corr = stirling_correction(q) - stirling_correction(p + q);
    return std::lgamma(p) + corr + p - p * std::log(p + q) + (q - 0.5) * std::log1p(-p / (p + q));
  }
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

namespace {

// Continued fraction for I_x(a,b) by the modified Lentz method.
double betacf(double x, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("beta_cdf: continued fraction did not converge");
}

}  // namespace

double beta_cdf(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("beta_cdf: x outside [0,1]");
  if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta_cdf: nonpositive shape");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lfront = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(lfront) * betacf(x, a, b) / a;
  return 1.0 - std::exp(lfront) * betacf(1.0 - x, b, a) / b;
}

double prob_beta_greater(int a1, int b1, int a2, int b2) {
  if (a1 < 1 || b1 < 1 || a2 < 1 || b2 < 1)
    throw std::domain_error("prob_beta_greater: parameters must be positive integers");
  // P(X > Y) = sum_{i<a1} B(a2+i, b1+b2) / ((b1+i) B(1+i, b1) B(a2, b2)); terms by ratio.
  double lt = log_beta(a2, b1 + b2) - log_beta(a2, b2);
  std::vector<double> terms;
  terms.reserve(a1);
  for (int i = 0; i < a1; ++i) {
    terms.push_back(lt);
    lt += std::log((static_cast<double>(a2 + i) * (b1 + i)) /
                   (static_cast<double>(a2 + b1 + b2 + i) * (i + 1)));
  }
  return std::min(1.0, std::exp(log_sum_exp(terms)));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
  // Wichura's AS241 (PPND16) followed by one Newton step on erfc.
  const double q = p - 0.5;
  double z;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    z = q *
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608) /
        (((((((5226.495278852545561 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
  } else {
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
      r -= 1.6;
      z = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r + 4.6303378461565452959) * r +
           1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r + 2.05319162663775882187) * r +
           1.0);
    } else {
      r -= 5.0;
      z = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r + 5.4637849111641143699) * r +
           6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r + 0.59983220655588793769) * r +
           1.0);
    }
    if (q < 0.0) z = -z;
  }
  const double err = normal_cdf(z) - p;
  const double dens = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  if (dens > 0.0) z -= err / dens;
  return z;
}

LogFactorials::LogFactorials(int kmax) : lf_(kmax + 1) {
  for (int k = 0; k <= kmax; ++k) lf_[k] = std::lgamma(k + 1.0);
}

}  // namespace rarexact
