#pragma once

#include <Eigen/Core>

#include "bfsmc/errors.hpp"

namespace bfsmc {

/// Classical four-stage Runge-Kutta step. Throws NumericError on a non-finite stage.
template <typename F, typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> step_rk4(
    F&& f, typename Derived::Scalar t, const Eigen::MatrixBase<Derived>& x,
    typename Derived::Scalar h) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  const auto half = h / 2;
  auto checked = [](Vec v) {
    if (!v.allFinite()) throw NumericError("step_rk4: non-finite stage value");
    return v;
  };
  const Vec k1 = checked(f(t, Vec(x)));
  const Vec k2 = checked(f(t + half, Vec(x + half * k1)));
  const Vec k3 = checked(f(t + half, Vec(x + half * k2)));
  const Vec k4 = checked(f(t + h, Vec(x + h * k3)));
  return checked(x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4));
}

}  // namespace bfsmc
