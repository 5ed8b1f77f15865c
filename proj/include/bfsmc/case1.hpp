#pragma once

// Barrier-function adaptive controller for unbounded perturbations:
//   u = L(t, z) u_r(z),
//   L = l(t)                                  before the crossing time t_bar,
//   L = c_bar * (mu / (mu - V))^{gamma_r (1 + kappa/2)}   afterwards,
// with c_bar = l(t_bar) / 2^{gamma_r (1 + kappa/2)} so that L is continuous.

#include <Eigen/Core>

#include <optional>
#include <string>

#include "bfsmc/feedback_pair.hpp"
#include "bfsmc/homogeneity.hpp"
#include "bfsmc/plant.hpp"

namespace bfsmc {

enum class Phase { Searching, Barrier };

std::string to_string(Phase phase);

/// V >= bound * (1 - kBarrierGuard) is treated as reaching the barrier.
inline constexpr double kBarrierGuard = 1e-9;

/// mu(t) = mu0 exp(-lambda t); lambda = 0 gives the constant schedule.
class MuSchedule {
 public:
  static MuSchedule exponential(double mu0, double lambda);
  static MuSchedule constant(double mu0);

  double operator()(double t) const;
  double derivative(double t) const;
  double mu0() const noexcept { return mu0_; }
  double lambda() const noexcept { return lambda_; }
  bool is_constant() const noexcept { return lambda_ == 0.0; }

 private:
  MuSchedule(double mu0, double lambda) : mu0_(mu0), lambda_(lambda) {}
  double mu0_;
  double lambda_;
};

/// l(t) = (l0 + slope t) exp(exp_rate t).
struct GrowthGain {
  double l0 = 1.0;
  double slope = 1.0;
  double exp_rate = 0.0;

  double operator()(double t) const;
  /// Throws DomainError unless l0 >= 1, slope >= 0, exp_rate >= 0.
  void validate() const;
};

struct Case1State {
  Phase phase = Phase::Searching;
  std::optional<double> t_bar;
  std::optional<double> c_bar;
};

/// L_mu(V) = mu / (mu - V). Throws BarrierBlowup when V >= mu (1 - kBarrierGuard).
double barrier_gain(double mu, double V);

struct Case1Gain {
  double L = 0.0;
  Case1State state;
};

/// Gain with the phase machine: the first time V <= mu(t)/2 the state switches
/// to Barrier with t_bar = t and c_bar = l(t_bar) / 2^{gamma_r (1 + kappa/2)}.
Case1Gain adaptive_gain(double t, double V, const MuSchedule& schedule, const GrowthGain& growth,
                        const HomogeneityParamsd& params, const Case1State& state);

/// Gain for a fixed phase snapshot (no transition).
double frozen_gain(double t, double V, const MuSchedule& schedule, const GrowthGain& growth,
                   const HomogeneityParamsd& params, const Case1State& state);

struct Case1Control {
  double u = 0.0;
  double L = 0.0;
  Case1State state;
};

Case1Control control_case1(double t, const Eigen::VectorXd& z, const FeedbackPair& pair,
                           const MuSchedule& schedule, const GrowthGain& growth,
                           const Case1State& state);

/// alpha~(t) = mu(t) / phi_tilde(t)^{1 + 1/(gamma_r (1 + kappa/2))}.
double alpha_tilde(double t, const MuSchedule& schedule, const TimeFunction& phi_tilde,
                   const HomogeneityParamsd& params);

struct ScheduleReport {
  bool mu_decay_ok = false;       ///< mu' > -(c_r/2) mu^{1+kappa/2} on the grid
  double mu_decay_margin = 0.0;   ///< min of mu' + (c_r/2) mu^{1+kappa/2}
  bool growth_tail_ok = false;    ///< l mu^e / phi_tilde^{1+e} increasing over the tail
  double growth_ratio_start = 0.0;
  double growth_ratio_end = 0.0;
  bool alpha_monotone = false;    ///< alpha~ non-increasing on the grid

  bool passed() const { return mu_decay_ok && growth_tail_ok; }
  std::string to_text() const;
};

/// Checks the schedule conditions on a uniform grid over [0, horizon]; the
/// divergence requirement on l(t) is probed on the last quarter of the horizon.
ScheduleReport validate_schedules(const MuSchedule& schedule, const GrowthGain& growth,
                                  const TimeFunction& phi_tilde, double c_r,
                                  const HomogeneityParamsd& params, double horizon,
                                  int n_points = 4001);

}  // namespace bfsmc
