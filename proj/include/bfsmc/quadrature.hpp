#pragma once

#include <array>
#include <cstddef>

namespace bfsmc::quad {

inline constexpr std::size_t kNodes = 24;

/// Gauss-Legendre rule on [0, 1] pre-composed with the quintic smoothstep
/// s = t^3 (10 - 15 t + 6 t^2). The substitution has a double zero of ds/dt at
/// both ends, which flattens algebraic endpoint singularities |s - c|^alpha
/// (alpha > -1) enough for the rule to reach near machine precision.
struct MappedRule {
  std::array<double, kNodes> s;  ///< abscissae in (0, 1)
  std::array<double, kNodes> w;  ///< weights including ds/dt
};

const MappedRule& mapped_rule();

/// Integral of f over [a, b] (b < a allowed), singular points only at the ends.
template <typename F>
double integrate(F&& f, double a, double b) {
  const MappedRule& rule = mapped_rule();
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t i = 0; i < kNodes; ++i) acc += rule.w[i] * f(a + len * rule.s[i]);
  return len * acc;
}

/// Same as integrate(), additionally splitting at 0 when it lies strictly inside.
template <typename F>
double integrate_split_at_zero(F&& f, double a, double b) {
  if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
    return integrate(f, a, 0.0) + integrate(f, 0.0, b);
  }
  return integrate(f, a, b);
}

}  // namespace bfsmc::quad
