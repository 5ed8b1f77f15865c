#include "bfsmc/case1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bfsmc/errors.hpp"

namespace bfsmc {

std::string to_string(Phase phase) {
  return phase == Phase::Searching ? "searching" : "barrier";
}

MuSchedule MuSchedule::exponential(double mu0, double lambda) {
  if (!(mu0 > 0.0)) throw DomainError("mu schedule: mu0 must be positive");
  if (!(lambda >= 0.0)) throw DomainError("mu schedule: lambda must be >= 0");
  return MuSchedule(mu0, lambda);
}

MuSchedule MuSchedule::constant(double mu0) { return exponential(mu0, 0.0); }

double MuSchedule::operator()(double t) const {
  return lambda_ == 0.0 ? mu0_ : mu0_ * std::exp(-lambda_ * t);
}

double MuSchedule::derivative(double t) const { return -lambda_ * (*this)(t); }

double GrowthGain::operator()(double t) const {
  const double base = l0 + slope * t;
  return exp_rate == 0.0 ? base : base * std::exp(exp_rate * t);
}

void GrowthGain::validate() const {
  if (!(l0 >= 1.0)) throw DomainError("growth gain: l0 must be >= 1");
  if (!(slope >= 0.0)) throw DomainError("growth gain: slope must be >= 0");
  if (!(exp_rate >= 0.0)) throw DomainError("growth gain: exp_rate must be >= 0");
}

double barrier_gain(double mu, double V) {
  if (!(mu > 0.0)) throw DomainError("barrier_gain: mu must be positive");
  if (V < 0.0) throw DomainError("barrier_gain: V must be >= 0");
  if (!(V < mu * (1.0 - kBarrierGuard))) throw BarrierBlowup(mu, V);
  return mu / (mu - V);
}

double frozen_gain(double t, double V, const MuSchedule& schedule, const GrowthGain& growth,
                   const HomogeneityParamsd& params, const Case1State& state) {
  if (state.phase == Phase::Searching) return growth(t);
  return *state.c_bar * std::pow(barrier_gain(schedule(t), V), params.barrier_exponent());
}

Case1Gain adaptive_gain(double t, double V, const MuSchedule& schedule, const GrowthGain& growth,
                        const HomogeneityParamsd& params, const Case1State& state) {
  if (V < 0.0) throw DomainError("adaptive_gain: V must be >= 0");
  Case1Gain out{0.0, state};
  if (state.phase == Phase::Searching && V <= schedule(t) / 2.0) {
    out.state.phase = Phase::Barrier;
    out.state.t_bar = t;
    out.state.c_bar = growth(t) / std::pow(2.0, params.barrier_exponent());
  }
  out.L = frozen_gain(t, V, schedule, growth, params, out.state);
  return out;
}

Case1Control control_case1(double t, const Eigen::VectorXd& z, const FeedbackPair& pair,
                           const MuSchedule& schedule, const GrowthGain& growth,
                           const Case1State& state) {
  const Case1Gain g = adaptive_gain(t, pair.V(z), schedule, growth, pair.params(), state);
  return {g.L * pair.u_r(z), g.L, g.state};
}

double alpha_tilde(double t, const MuSchedule& schedule, const TimeFunction& phi_tilde,
                   const HomogeneityParamsd& params) {
  return schedule(t) / std::pow(phi_tilde(t), 1.0 + 1.0 / params.barrier_exponent());
}

std::string ScheduleReport::to_text() const {
  std::ostringstream os;
  os << "mu decay condition: " << (mu_decay_ok ? "PASS" : "FAIL") << " (margin " << mu_decay_margin
     << ")\n"
     << "growth divergence (tail): " << (growth_tail_ok ? "PASS" : "FAIL") << " (ratio "
     << growth_ratio_start << " -> " << growth_ratio_end << ")\n"
     << "alpha~ non-increasing: " << (alpha_monotone ? "yes" : "no") << '\n';
  return os.str();
}

ScheduleReport validate_schedules(const MuSchedule& schedule, const GrowthGain& growth,
                                  const TimeFunction& phi_tilde, double c_r,
                                  const HomogeneityParamsd& params, double horizon,
                                  int n_points) {
  if (!(c_r > 0.0)) throw DomainError("validate_schedules: c_r must be positive");
  if (!(horizon > 0.0) || n_points < 8) throw DomainError("validate_schedules: bad grid");
  const double e = params.barrier_exponent();
  const double dt = horizon / (n_points - 1);
  ScheduleReport rep;
  rep.mu_decay_margin = std::numeric_limits<double>::infinity();
  rep.alpha_monotone = true;
  double prev_alpha = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_points; ++k) {
    const double t = k * dt;
    const double mu = schedule(t);
    const double margin = schedule.derivative(t) + 0.5 * c_r * std::pow(mu, params.decay_exponent());
    rep.mu_decay_margin = std::min(rep.mu_decay_margin, margin);
    const double a = alpha_tilde(t, schedule, phi_tilde, params);
    if (a > prev_alpha * (1.0 + 1e-12)) rep.alpha_monotone = false;
    prev_alpha = a;
  }
  rep.mu_decay_ok = rep.mu_decay_margin > 0.0;

  auto ratio = [&](double t) {
    return growth(t) * std::pow(schedule(t), e) / std::pow(phi_tilde(t), 1.0 + e);
  };
  const int tail_start = (3 * (n_points - 1)) / 4;
  rep.growth_tail_ok = true;
  double prev = ratio(tail_start * dt);
  rep.growth_ratio_start = prev;
  for (int k = tail_start + 1; k < n_points; ++k) {
    const double cur = ratio(k * dt);
    if (!(cur > prev)) rep.growth_tail_ok = false;
    prev = cur;
  }
  rep.growth_ratio_end = prev;
  return rep;
}

}  // namespace bfsmc
