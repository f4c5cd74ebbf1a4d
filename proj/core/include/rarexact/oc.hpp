#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rarexact/exact_tests.hpp"
#include "rarexact/path_engine.hpp"

namespace rarexact {

struct AsymptoticRule {
  double alpha = 0.05;
};

using TestRule = std::variant<AsymptoticRule, ConditionalRule, UnconditionalRule, GbRule>;

std::string test_name(const TestRule& rule);

/// 0/1 rejection indicator over the terminal layer of g.
std::vector<double> rejection_indicator(const PathWeightTable& g, const TestRule& rule);
/// n_{a*}(x)/n for the arm a* favoured by theta; 1/2 when theta_c == theta_d.
std::vector<double> benefit_integrand(const PathWeightTable& g, double theta_c, double theta_d);

double rejection_rate(const PathWeightTable& g, const TestRule& rule, double theta_c, double theta_d);
double patient_benefit(const PathWeightTable& g, double theta_c, double theta_d);

struct ThetaPoint {
  double theta_c;
  double theta_d;
};

/// Null diagonal theta_c = theta_d over [from, to] in steps of `step`.
std::vector<ThetaPoint> null_diagonal(double from, double to, double step);
/// Curves {theta_c = base, theta_d in [base, 1]} for each base, in steps of `step`.
std::vector<ThetaPoint> alternative_curves(const std::vector<double>& bases, double step);

struct OcProfile {
  std::string policy;
  std::string test;
  int n = 0;
  double alpha = 0.05;
  std::vector<ThetaPoint> theta;
  std::vector<double> rejection_rate;
  std::vector<double> patient_benefit;
};

OcProfile profile(const PathWeightTable& g, const TestRule& rule, const std::vector<ThetaPoint>& grid);

}  // namespace rarexact
