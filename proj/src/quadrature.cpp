#include "bfsmc/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace bfsmc::quad {
namespace {

MappedRule build_rule() {
  constexpr std::size_t n = kNodes;
  MappedRule rule{};
  // Legendre roots by Newton iteration from the Chebyshev-like initial guess.
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
        p0 = p1;
        p1 = pk;
      }
      dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double weight = 2.0 / ((1.0 - x * x) * dp * dp);
    const double t = 0.5 * (x + 1.0);
    const double smooth = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    const double dsmooth = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    rule.s[i] = smooth;
    rule.w[i] = 0.5 * weight * dsmooth;
  }
  return rule;
}

}  // namespace

const MappedRule& mapped_rule() {
  static const MappedRule rule = build_rule();
  return rule;
}

}  // namespace bfsmc::quad
