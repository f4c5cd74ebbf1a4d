#pragma once

#include "rarexact/state_space.hpp"

namespace rarexact {

/// T = (p_D - p_C) / sqrt(p_C(1-p_C)/n_C + p_D(1-p_D)/n_D), with the
/// convention 0 * inf = 0 when both estimates are degenerate.
///
/// The value is computed as sign * sqrt(num / den) from the gcd-reduced
/// integer ratio T^2 = (s_D n_C - s_C n_D)^2 n_C n_D / (s_C f_C n_D^3 + s_D f_D n_C^3),
/// so states with equal T^2 map to bit-identical doubles.
double wald_statistic(const TrialState& x);

double wald_critical_value(double alpha);
bool asymptotic_reject(const TrialState& x, double alpha);

}  // namespace rarexact
