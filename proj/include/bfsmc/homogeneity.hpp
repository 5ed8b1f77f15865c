#pragma once

// Signed powers, weighted dilations and the Euler field for the family
// p_i = p + (i-1)*kappa, i = 1..r+1.

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "bfsmc/errors.hpp"

namespace bfsmc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// |x|^a sgn(x) for a > 0. Returns exactly zero at x = 0.
template <typename Scalar>
Scalar signed_power(Scalar x, Scalar a) {
  if (!(a > Scalar(0))) {
    throw DomainError("signed_power: exponent must be positive");
  }
  if (x == Scalar(0)) return Scalar(0);
  using std::abs;
  using std::pow;
  const Scalar m = pow(abs(x), a);
  return x < Scalar(0) ? -m : m;
}

template <typename Scalar>
struct HomogeneityParams {
  int r = 1;
  Scalar p = Scalar(1);
  Scalar kappa = Scalar(-0.5);
  /// weights(i) = p + i*kappa for i = 0..r (p_1..p_{r+1}).
  Vector<Scalar> weights;
  /// p_{r+1} / (2 - p_r).
  Scalar gamma_r = Scalar(0);

  /// Weights of the r state coordinates.
  auto state_weights() const { return weights.head(r); }
  Scalar output_weight() const { return weights(r); }
  /// gamma_r (1 + kappa/2), the exponent applied to the barrier gain.
  Scalar barrier_exponent() const { return gamma_r * (Scalar(1) + kappa / Scalar(2)); }
  /// 1 + kappa/2, the exponent of V in the decrease law.
  Scalar decay_exponent() const { return Scalar(1) + kappa / Scalar(2); }
};

using HomogeneityParamsd = HomogeneityParams<double>;

template <typename Scalar = double>
HomogeneityParams<Scalar> make_params(int r, Scalar p, Scalar kappa) {
  if (r < 1) throw DomainError("make_params: r must be >= 1");
  if (!(p > Scalar(0) && p < Scalar(2))) {
    throw DomainError("make_params: p must lie in (0, 2)");
  }
  if (!(kappa > Scalar(-1) && kappa < Scalar(0))) {
    throw DomainError("make_params: kappa must lie in (-1, 0)");
  }
  HomogeneityParams<Scalar> hp;
  hp.r = r;
  hp.p = p;
  hp.kappa = kappa;
  hp.weights.resize(r + 1);
  for (int i = 0; i <= r; ++i) hp.weights(i) = p + Scalar(i) * kappa;
  if (!(hp.weights(r) > Scalar(0))) {
    throw InfeasibleWeightsError("make_params: p + r*kappa = " +
                                 std::to_string(double(hp.weights(r))) +
                                 " is not positive");
  }
  hp.gamma_r = hp.weights(r) / (Scalar(2) - hp.weights(r - 1));
  return hp;
}

/// delta_eps(z): component i scaled by eps^{p_i}.
template <typename Derived>
Vector<typename Derived::Scalar> dilate(
    typename Derived::Scalar eps, const Eigen::MatrixBase<Derived>& z,
    const HomogeneityParams<typename Derived::Scalar>& params) {
  using Scalar = typename Derived::Scalar;
  if (!(eps > Scalar(0))) throw DomainError("dilate: eps must be positive");
  if (z.size() != params.r) throw DomainError("dilate: state size differs from r");
  using std::pow;
  Vector<Scalar> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out(i) = pow(eps, params.weights(i)) * z(i);
  }
  return out;
}

/// D_p z = (p_1 z_1, ..., p_r z_r).
template <typename Derived>
Vector<typename Derived::Scalar> euler_vector(
    const Eigen::MatrixBase<Derived>& z,
    const HomogeneityParams<typename Derived::Scalar>& params) {
  if (z.size() != params.r) throw DomainError("euler_vector: state size differs from r");
  return params.state_weights().cwiseProduct(z);
}

/// Jordan shift J_r z = (z_2, ..., z_r, 0).
template <typename Derived>
Vector<typename Derived::Scalar> jordan_shift(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> out = Vector<Scalar>::Zero(z.size());
  if (z.size() > 1) out.head(z.size() - 1) = z.tail(z.size() - 1);
  return out;
}

}  // namespace bfsmc
