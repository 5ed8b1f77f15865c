#include "bfsmc/host.hpp"

#include <cmath>

#include "bfsmc/errors.hpp"

namespace bfsmc {

HostGains frozen_host_gains(double t, double V, const GrowthGain& growth,
                            const HomogeneityParamsd& params, const HostState& state) {
  if (state.phase == Phase::Searching) return {growth(t), 0.0, state};
  const double l_eps = barrier_gain(state.epsilon, V);
  return {*state.c_bar * std::pow(l_eps, -params.kappa / 2.0), l_eps, state};
}

HostGains gains_host(double t, double V, const GrowthGain& growth, const HomogeneityParamsd& params,
                     const HostState& state) {
  if (V < 0.0) throw DomainError("gains_host: V must be >= 0");
  if (!(state.epsilon > 0.0)) throw DomainError("gains_host: epsilon must be positive");
  HostState next = state;
  if (next.phase == Phase::Searching && V <= next.epsilon / 2.0) {
    next.phase = Phase::Barrier;
    next.t_bar = t;
    next.c_bar = growth(t) / std::pow(2.0, -params.kappa / 2.0);
  }
  return frozen_host_gains(t, V, growth, params, next);
}

HostControl control_host(double t, const Eigen::VectorXd& z, const FeedbackPair& pair,
                         const GrowthGain& growth, const HostState& state) {
  const HostGains g = gains_host(t, pair.V(z), growth, pair.params(), state);
  HostControl out;
  out.L1 = g.L1;
  out.L2 = g.L2;
  out.state = g.state;
  out.u = g.L1 * pair.u_r(z) + state.xi;
  out.xi_dot = g.L2 == 0.0 ? 0.0 : -g.L2 * pair.partial_r(z);
  return out;
}

FixedHostControl control_fixed_host(const Eigen::VectorXd& z, double xi, const FeedbackPair& pair,
                                    const FixedHost& gains) {
  if (!(gains.kp > 0.0) || !(gains.ki > 0.0)) throw DomainError("fixed HOST: kp, ki must be positive");
  return {gains.kp * pair.u_r(z) + xi, -gains.ki * pair.partial_r(z)};
}

}  // namespace bfsmc
