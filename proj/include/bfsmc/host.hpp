#pragma once

// Barrier-adaptive higher-order super-twisting for Lipschitz perturbations:
//   u = L1(t, z) u_r(z) + xi,   xi' = -L2(t, z) d_r V(z),   xi(0) = 0,
//   before t_bar: L1 = l(t), L2 = 0;
//   after:        L1 = c_bar L_eps^{-kappa/2}, L2 = L_eps,  L_eps = eps / (eps - V),
// with t_bar the first time V <= eps/2 and c_bar = l(t_bar) / 2^{-kappa/2}.

#include <Eigen/Core>

#include <optional>

#include "bfsmc/case1.hpp"
#include "bfsmc/feedback_pair.hpp"

namespace bfsmc {

struct HostState {
  Phase phase = Phase::Searching;
  std::optional<double> t_bar;
  std::optional<double> c_bar;
  double xi = 0.0;
  double epsilon = 0.1;
};

struct HostGains {
  double L1 = 0.0;
  double L2 = 0.0;
  HostState state;
};

HostGains gains_host(double t, double V, const GrowthGain& growth, const HomogeneityParamsd& params,
                     const HostState& state);

/// Gains for a fixed phase snapshot (no transition).
HostGains frozen_host_gains(double t, double V, const GrowthGain& growth,
                            const HomogeneityParamsd& params, const HostState& state);

struct HostControl {
  double u = 0.0;
  double xi_dot = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
  HostState state;
};

/// Uses state.xi as the current integral state.
HostControl control_host(double t, const Eigen::VectorXd& z, const FeedbackPair& pair,
                         const GrowthGain& growth, const HostState& state);

/// Non-adaptive reference: u = k_P u_r + xi, xi' = -k_I d_r V.
struct FixedHost {
  double kp = 1.0;
  double ki = 1.0;
};

struct FixedHostControl {
  double u = 0.0;
  double xi_dot = 0.0;
};

FixedHostControl control_fixed_host(const Eigen::VectorXd& z, double xi, const FeedbackPair& pair,
                                    const FixedHost& gains);

}  // namespace bfsmc
