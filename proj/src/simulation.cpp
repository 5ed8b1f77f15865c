#include "bfsmc/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include "bfsmc/errors.hpp"
#include "bfsmc/rk4.hpp"

namespace bfsmc {

using Eigen::VectorXd;

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Case1: return "case1";
    case ControllerKind::Host: return "host";
    case ControllerKind::HostFixed: return "host_fixed";
    case ControllerKind::PureChain: return "pure_chain";
    case ControllerKind::OpenLoop: return "open_loop";
  }
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& name) {
  for (ControllerKind k : {ControllerKind::Case1, ControllerKind::Host, ControllerKind::HostFixed,
                           ControllerKind::PureChain, ControllerKind::OpenLoop}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown controller kind '" + name + "'");
}

void Scenario::validate() const {
  if (pair.r < 1) throw ConfigError("scenario: r must be >= 1");
  if (!(h > 0.0)) throw ConfigError("scenario: step h must be positive");
  if (!(horizon > h)) throw ConfigError("scenario: horizon must exceed h");
  if (z0.size() != pair.r) throw ConfigError("scenario: z0 must have r entries");
  if (!z0.allFinite()) throw ConfigError("scenario: z0 must be finite");
  if (output.decimation < 1) throw ConfigError("scenario: decimation must be >= 1");
  if (validation_samples < 100) throw ConfigError("scenario: validation_samples must be >= 100");
  if (pair.gains) {
    if (pair.gains->size() != pair.r) throw ConfigError("scenario: expected r gains");
    if (!(pair.gains->array() > 0.0).all()) throw ConfigError("scenario: gains must be positive");
  }
  try {
    make_params(pair.r, pair.p, pair.kappa);
    switch (controller.kind) {
      case ControllerKind::Case1:
        controller.growth.validate();
        (void)controller.schedule();
        break;
      case ControllerKind::Host:
        controller.growth.validate();
        if (!(controller.epsilon > 0.0)) throw DomainError("epsilon must be positive");
        break;
      case ControllerKind::HostFixed:
        if (!(controller.fixed.kp > 0.0 && controller.fixed.ki > 0.0)) {
          throw DomainError("kp and ki must be positive");
        }
        break;
      default: break;
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

std::optional<double> Event::get(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return std::nullopt;
}

Trajectory::Trajectory(int r, ControllerKind kind) : r_(r), kind_(kind) {}

bool Trajectory::is_host() const noexcept {
  return kind_ == ControllerKind::Host || kind_ == ControllerKind::HostFixed;
}

void Trajectory::reserve(std::size_t n) {
  for (auto* col : {&t, &V, &bound, &L, &L1, &L2, &xi, &u, &phi, &gamma}) col->reserve(n);
  zs.reserve(n * static_cast<std::size_t>(r_));
  phase.reserve(n);
}

void Trajectory::push_back(const Row& row, const VectorXd& z) {
  t.push_back(row.t);
  zs.insert(zs.end(), z.data(), z.data() + z.size());
  V.push_back(row.V);
  bound.push_back(row.bound);
  phase.push_back(row.phase);
  L.push_back(row.L);
  L1.push_back(row.L1);
  L2.push_back(row.L2);
  xi.push_back(row.xi);
  u.push_back(row.u);
  phi.push_back(row.phi);
  gamma.push_back(row.gamma);
}

const Event* Trajectory::find_event(const std::string& kind) const {
  for (const Event& e : events) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

std::size_t Trajectory::count_events(const std::string& kind) const {
  return static_cast<std::size_t>(std::count_if(
      events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; }));
}

FeedbackPair build_scenario_pair(const Scenario& scenario) {
  const HomogeneityParamsd params = make_params(scenario.pair.r, scenario.pair.p, scenario.pair.kappa);
  VectorXd gains = scenario.pair.gains
                       ? *scenario.pair.gains
                       : tune_gains(params, VectorXd::Ones(params.r), 2.0,
                                    TuneOptions{2000, scenario.seed, 60});
  return build_hong_pair(params, gains, SamplingOptions{scenario.validation_samples, scenario.seed});
}

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void fill_meta(Trajectory& traj, const Scenario& sc, const FeedbackPair& pair,
               const Disturbance& dist) {
  auto& m = traj.meta;
  m["scenario"] = sc.name;
  m["controller"] = to_string(sc.controller.kind);
  m["r"] = std::to_string(pair.r());
  m["p"] = num(pair.params().p);
  m["kappa"] = num(pair.params().kappa);
  m["gamma_r"] = num(pair.params().gamma_r);
  std::ostringstream gains;
  for (Eigen::Index i = 0; i < pair.gains().size(); ++i) {
    gains << (i ? " " : "") << num(pair.gains()(i));
  }
  m["gains"] = gains.str();
  if (pair.estimated()) {
    m["c_r"] = num(pair.estimated()->c_r);
    m["d_r"] = num(pair.estimated()->d_r);
    m["c_u"] = num(pair.estimated()->c_u);
  }
  const ControllerSpec& c = sc.controller;
  if (c.kind == ControllerKind::Case1) {
    m["mu0"] = num(c.mu0);
    m["lambda"] = num(c.lambda);
  }
  if (c.kind == ControllerKind::Host) m["epsilon"] = num(c.epsilon);
  if (c.kind == ControllerKind::Case1 || c.kind == ControllerKind::Host) {
    m["l0"] = num(c.growth.l0);
    m["slope"] = num(c.growth.slope);
    m["exp_rate"] = num(c.growth.exp_rate);
  }
  if (c.kind == ControllerKind::HostFixed) {
    m["kp"] = num(c.fixed.kp);
    m["ki"] = num(c.fixed.ki);
  }
  m["h"] = num(sc.h);
  m["horizon"] = num(sc.horizon);
  m["seed"] = std::to_string(sc.seed);
  m["disturbance.id"] = dist.spec().id;
  for (const auto& [k, v] : dist.spec().params) m["disturbance." + k] = num(v);
  if (!dist.spec().table_path.empty()) m["disturbance.table"] = dist.spec().table_path;
}

}  // namespace

Trajectory simulate(const Scenario& sc, const FeedbackPair& pair, const Disturbance& dist) {
  sc.validate();
  const int r = pair.r();
  if (r != sc.pair.r) throw ConfigError("simulate: pair order differs from scenario");
  const HomogeneityParamsd& hp = pair.params();
  const ControllerSpec& cs = sc.controller;
  const ControllerKind kind = cs.kind;
  const bool host = kind == ControllerKind::Host || kind == ControllerKind::HostFixed;
  const int dim = host ? r + 1 : r;
  const MuSchedule mu = cs.schedule();
  const GrowthGain& growth = cs.growth;

  Case1State c1;
  HostState hs;
  hs.epsilon = cs.epsilon;

  auto bound_at = [&](double t) {
    if (kind == ControllerKind::Case1) return mu(t);
    if (kind == ControllerKind::Host) return cs.epsilon;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const bool adaptive = kind == ControllerKind::Case1 || kind == ControllerKind::Host;
  auto in_barrier = [&] {
    return kind == ControllerKind::Case1 ? c1.phase == Phase::Barrier : hs.phase == Phase::Barrier;
  };

  // Closed-loop vector field for a frozen controller snapshot.
  auto field = [&](const Case1State& s1, const HostState& sh) {
    return [&, s1, sh](double t, const VectorXd& x) -> VectorXd {
      const VectorXd z = x.head(r);
      double u = 0.0, xi_dot = 0.0;
      switch (kind) {
        case ControllerKind::Case1: {
          const double L = s1.phase == Phase::Searching ? growth(t)
                                                         : frozen_gain(t, pair.V(z), mu, growth, hp, s1);
          u = L * pair.u_r(z);
          break;
        }
        case ControllerKind::Host: {
          const double V = sh.phase == Phase::Searching ? 0.0 : pair.V(z);
          const HostGains g = frozen_host_gains(t, V, growth, hp, sh);
          u = g.L1 * pair.u_r(z) + x(r);
          if (g.L2 != 0.0) xi_dot = -g.L2 * pair.partial_r(z);
          break;
        }
        case ControllerKind::HostFixed: {
          const FixedHostControl c = control_fixed_host(z, x(r), pair, cs.fixed);
          u = c.u;
          xi_dot = c.xi_dot;
          break;
        }
        case ControllerKind::PureChain: u = pair.u_r(z); break;
        case ControllerKind::OpenLoop: u = 0.0; break;
      }
      VectorXd out(dim);
      out.head(r) = rhs(t, z, u, dist);
      if (host) out(r) = xi_dot;
      return out;
    };
  };

  Trajectory traj(r, kind);
  fill_meta(traj, sc, pair, dist);
  const auto steps = static_cast<std::size_t>(std::llround(sc.horizon / sc.h));
  traj.reserve(steps + 1);

  auto record = [&](double t, const VectorXd& x) {
    const VectorXd z = x.head(r);
    Trajectory::Row row;
    row.t = t;
    row.V = pair.V(z);
    row.bound = bound_at(t);
    row.phi = dist.phi(t);
    row.gamma = dist.gamma(t);
    const double ur = pair.u_r(z);
    switch (kind) {
      case ControllerKind::Case1:
        row.phase = to_string(c1.phase);
        row.L = frozen_gain(t, row.V, mu, growth, hp, c1);
        row.u = row.L * ur;
        break;
      case ControllerKind::Host: {
        const HostGains g = frozen_host_gains(t, row.V, growth, hp, hs);
        row.phase = to_string(hs.phase);
        row.L1 = g.L1;
        row.L2 = g.L2;
        row.xi = x(r);
        row.u = g.L1 * ur + row.xi;
        break;
      }
      case ControllerKind::HostFixed:
        row.phase = "none";
        row.L1 = cs.fixed.kp;
        row.L2 = cs.fixed.ki;
        row.xi = x(r);
        row.u = cs.fixed.kp * ur + row.xi;
        break;
      case ControllerKind::PureChain:
        row.phase = "none";
        row.L = 1.0;
        row.u = ur;
        break;
      case ControllerKind::OpenLoop:
        row.phase = "none";
        row.L = 0.0;
        row.u = 0.0;
        break;
    }
    traj.push_back(row, z);
  };

  // Applies the phase transition at (t, x) with V <= bound/2 and logs the crossing.
  auto switch_phase = [&](double t, const VectorXd& x) {
    const double V = pair.V(x.head(r));
    double before = 0.0, after = 0.0, c_bar = 0.0;
    if (kind == ControllerKind::Case1) {
      before = growth(t);
      c1 = adaptive_gain(t, V, mu, growth, hp, c1).state;
      after = frozen_gain(t, V, mu, growth, hp, c1);
      c_bar = *c1.c_bar;
    } else {
      before = growth(t);
      hs = gains_host(t, V, growth, hp, hs).state;
      after = frozen_host_gains(t, V, growth, hp, hs).L1;
      c_bar = *hs.c_bar;
    }
    traj.events.push_back({"crossing",
                           t,
                           {{"V", V},
                            {"bound", bound_at(t)},
                            {"gain_before", before},
                            {"gain_after", after},
                            {"c_bar", c_bar}}});
  };

  VectorXd x = VectorXd::Zero(dim);
  x.head(r) = sc.z0;
  if (adaptive && pair.V(sc.z0) <= bound_at(0.0) / 2.0) switch_phase(0.0, x);
  record(0.0, x);

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * sc.h;
    const double t_next = static_cast<double>(n + 1) * sc.h;
    VectorXd next;
    try {
      next = step_rk4(field(c1, hs), t, x, sc.h);
      if (adaptive && !in_barrier()) {
        auto excess = [&](const VectorXd& y, double s) { return pair.V(y.head(r)) - bound_at(s) / 2.0; };
        if (excess(next, t_next) <= 0.0) {
          // Bisection on the sub-step length; g(lo) > 0 >= g(hi).
          double lo = 0.0, hi = sc.h;
          VectorXd x_hi = next;
          for (int it = 0; it < 200 && hi - lo > 1e-13 * sc.h; ++it) {
            const double mid = 0.5 * (lo + hi);
            VectorXd x_mid = step_rk4(field(c1, hs), t, x, mid);
            if (excess(x_mid, t + mid) <= 0.0) {
              hi = mid;
              x_hi = std::move(x_mid);
            } else {
              lo = mid;
            }
          }
          const double t_bar = t + hi;
          switch_phase(t_bar, x_hi);
          const double rest = t_next - t_bar;
          next = rest > 0.0 ? step_rk4(field(c1, hs), t_bar, x_hi, rest) : x_hi;
        }
      }
    } catch (const BarrierBlowup& e) {
      traj.events.push_back({"barrier_blowup", t, {{"V", e.value()}, {"bound", e.bound()}}});
      break;
    } catch (const NumericError&) {
      traj.events.push_back({"blowup", t, {}});
      break;
    }
    if (adaptive && in_barrier()) {
      const double V = pair.V(next.head(r));
      const double b = bound_at(t_next);
      if (!(V < b * (1.0 - kBarrierGuard))) {
        traj.events.push_back({"escape", t_next, {{"V", V}, {"bound", b}}});
        break;
      }
    }
    x = std::move(next);
    record(t_next, x);
  }
  return traj;
}

Trajectory run(const Scenario& scenario) {
  scenario.validate();
  const Disturbance dist = make_disturbance(scenario.disturbance);
  check_declared_class(dist, scenario.horizon);
  return simulate(scenario, build_scenario_pair(scenario), dist);
}

std::vector<BatchResult> run_batch(const std::vector<Scenario>& scenarios, unsigned threads) {
  std::vector<BatchResult> results(scenarios.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, scenarios.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      try {
        results[i].trajectory = run(scenarios[i]);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  return results;
}

}  // namespace bfsmc
