#pragma once

#include <cstddef>
#include <vector>

namespace spectrade {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendreRule make_gauss_legendre(std::size_t order);

// Order-64 rule, built once.
const GaussLegendreRule& gauss_legendre_64();

// Mean of f over [lo, hi] under the given rule; f(lo) when lo == hi.
template <typename F>
double interval_mean(const GaussLegendreRule& rule, double lo, double hi, F&& f) {
  if (lo == hi) return f(lo);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  }
  return 0.5 * sum;
}

}  // namespace spectrade
