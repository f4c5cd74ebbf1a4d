#include "rarexact/oc.hpp"

#include <cmath>
#include <stdexcept>

#include "rarexact/wald.hpp"

namespace rarexact {

std::string test_name(const TestRule& rule) {
  static const char* kNames[] = {"asymptotic", "conditional", "unconditional", "gb"};
  return kNames[rule.index()];
}

std::vector<double> rejection_indicator(const PathWeightTable& g, const TestRule& rule) {
  const LayerIndex li = g.layer();
  std::vector<double> f(li.size(), 0.0);
  auto check_n = [&](int n) {
    if (n != g.n) throw std::invalid_argument("rejection rule built for a different horizon");
  };
  if (const auto* r = std::get_if<AsymptoticRule>(&rule)) {
    const double z = wald_critical_value(r->alpha);
    li.for_each([&](std::size_t i, const TrialState& x) {
      if (x.n_c > 0 && x.n_d > 0) f[i] = std::abs(wald_statistic(x)) >= z ? 1.0 : 0.0;
    });
  } else if (const auto* r = std::get_if<ConditionalRule>(&rule)) {
    check_n(r->n);
    li.for_each([&](std::size_t i, const TrialState& x) {
      if (x.n_c > 0 && x.n_d > 0) f[i] = r->rejects(wald_statistic(x), x.successes()) ? 1.0 : 0.0;
    });
  } else if (const auto* r = std::get_if<UnconditionalRule>(&rule)) {
    check_n(r->n);
    li.for_each([&](std::size_t i, const TrialState& x) {
      if (x.n_c > 0 && x.n_d > 0) f[i] = r->rejects(wald_statistic(x)) ? 1.0 : 0.0;
    });
  } else {
    const auto& gb = std::get<GbRule>(rule);
    check_n(gb.n);
    if (gb.p_value.size() != li.size()) throw std::invalid_argument("GB rule built for a different table");
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = gb.rejects(i) ? 1.0 : 0.0;
  }
  return f;
}

std::vector<double> benefit_integrand(const PathWeightTable& g, double theta_c, double theta_d) {
  const LayerIndex li = g.layer();
  std::vector<double> f(li.size());
  li.for_each([&](std::size_t i, const TrialState& x) {
    if (theta_c == theta_d)
      f[i] = 0.5;
    else
      f[i] = static_cast<double>(theta_c > theta_d ? x.n_c : x.n_d) / g.n;
  });
  return f;
}

double rejection_rate(const PathWeightTable& g, const TestRule& rule, double theta_c, double theta_d) {
  return oc_value(rejection_indicator(g, rule), g, theta_c, theta_d);
}

double patient_benefit(const PathWeightTable& g, double theta_c, double theta_d) {
  if (theta_c == theta_d) return 0.5;
  return oc_value(benefit_integrand(g, theta_c, theta_d), g, theta_c, theta_d);
}

std::vector<ThetaPoint> null_diagonal(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw std::invalid_argument("null_diagonal: empty grid");
  std::vector<ThetaPoint> out;
  const long m = std::lround((to - from) / step);
  for (long k = 0; k <= m; ++k) {
    const double th = from + k * step;
    out.push_back({th, th});
  }
  return out;
}

std::vector<ThetaPoint> alternative_curves(const std::vector<double>& bases, double step) {
  if (!(step > 0.0) || bases.empty()) throw std::invalid_argument("alternative_curves: empty grid");
  std::vector<ThetaPoint> out;
  for (double b : bases) {
    const long m = std::lround(std::floor((1.0 - b) / step + 1e-9));
    for (long k = 0; k <= m; ++k) out.push_back({b, std::min(1.0, b + k * step)});
  }
  return out;
}

OcProfile profile(const PathWeightTable& g, const TestRule& rule, const std::vector<ThetaPoint>& grid) {
  if (grid.empty()) throw std::invalid_argument("profile: empty grid");
  OcProfile out;
  out.policy = g.policy;
  out.test = test_name(rule);
  out.n = g.n;
  std::visit([&](const auto& r) { out.alpha = r.alpha; }, rule);
  out.theta = grid;
  const auto f = rejection_indicator(g, rule);
  const OcEvaluator rej(g, f);
  // Benefit integrands: n_c/n and n_d/n, reused across theta.
  const LayerIndex li = g.layer();
  std::vector<double> fc(li.size()), fd(li.size());
  li.for_each([&](std::size_t i, const TrialState& x) {
    fc[i] = static_cast<double>(x.n_c) / g.n;
    fd[i] = static_cast<double>(x.n_d) / g.n;
  });
  const OcEvaluator ben_c(g, fc), ben_d(g, fd);
  for (const auto& th : grid) {
    out.rejection_rate.push_back(rej(th.theta_c, th.theta_d));
    if (th.theta_c == th.theta_d)
      out.patient_benefit.push_back(0.5);
    else
      out.patient_benefit.push_back(th.theta_c > th.theta_d ? ben_c(th.theta_c, th.theta_d)
                                                            : ben_d(th.theta_c, th.theta_d));
  }
  return out;
}

}  // namespace rarexact
