#pragma once

#include "ouk/common.hpp"

#include <functional>
#include <vector>

namespace ouk {

/// Adaptive scalar quadrature (Gauss-Kronrod 7-15 with bisection).
/// Returns the integral of f over [a,b] to absolute tolerance abs_tol.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 60);

/// Nodes/weights of an n-point rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1,1].
Rule gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight: sum w_i f(x_i) ~ E[f(Z)],
/// Z ~ N(0,1). Weights sum to 1.
Rule gauss_hermite_prob(int n);

/// Composite Gauss-Legendre of f over [a,b] with `panels` equal panels.
double composite_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    const Rule& rule);

}  // namespace ouk
