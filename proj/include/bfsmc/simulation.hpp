#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bfsmc/case1.hpp"
#include "bfsmc/feedback_pair.hpp"
#include "bfsmc/host.hpp"
#include "bfsmc/plant.hpp"

namespace bfsmc {

enum class ControllerKind { Case1, Host, HostFixed, PureChain, OpenLoop };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

struct PairSpec {
  int r = 3;
  double p = 1.0;
  double kappa = -1.0 / 6.0;
  /// Explicit l_1..l_r; empty means "tune from ones with factor 2".
  std::optional<Eigen::VectorXd> gains;
};

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Case1;
  double mu0 = 5.0;
  double lambda = 0.2;  ///< 0 gives a constant mu
  double epsilon = 0.1;
  GrowthGain growth;
  FixedHost fixed;

  MuSchedule schedule() const { return MuSchedule::exponential(mu0, lambda); }
};

struct OutputSpec {
  std::string csv;
  int decimation = 1;
};

struct Scenario {
  std::string name;
  PairSpec pair;
  ControllerSpec controller;
  DisturbanceSpec disturbance;
  Eigen::VectorXd z0;
  double h = 1e-4;
  double horizon = 30.0;
  std::uint64_t seed = 1;
  int validation_samples = 10000;
  OutputSpec output;

  /// Throws ConfigError on violated invariants (h > 0, T > h, |z0| = r, ...).
  void validate() const;
};

/// Named scalar fields attached to an event.
struct Event {
  std::string kind;  ///< crossing, escape, barrier_blowup, blowup
  double t = 0.0;
  std::vector<std::pair<std::string, double>> fields;

  std::optional<double> get(const std::string& key) const;
};

/// Uniform-grid record of a closed-loop run, stored column-wise.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(int r, ControllerKind kind);

  int r() const noexcept { return r_; }
  ControllerKind kind() const noexcept { return kind_; }
  bool is_host() const noexcept;
  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }
  void reserve(std::size_t n);

  Eigen::Map<const Eigen::VectorXd> z(std::size_t i) const {
    return {zs.data() + i * static_cast<std::size_t>(r_), r_};
  }

  struct Row {
    double t = 0, V = 0, bound = 0;
    std::string phase;
    double L = 0, L1 = 0, L2 = 0, xi = 0, u = 0, phi = 0, gamma = 0;
  };
  void push_back(const Row& row, const Eigen::VectorXd& z);

  const Event* find_event(const std::string& kind) const;
  std::size_t count_events(const std::string& kind) const;

  std::vector<double> t, zs, V, bound, L, L1, L2, xi, u, phi, gamma;
  std::vector<std::string> phase;  ///< searching, barrier or none
  std::vector<Event> events;
  std::map<std::string, std::string> meta;

 private:
  int r_ = 0;
  ControllerKind kind_ = ControllerKind::Case1;
};

/// Builds the feedback pair for a scenario (tuning if requested) and validates it.
FeedbackPair build_scenario_pair(const Scenario& scenario);

/// Integrates the closed loop on [0, T] with fixed-step RK4. The controller
/// phase is frozen inside each step; a crossing of V = bound/2 is located by
/// bisection on the step fraction and the switch is applied at the refined time.
Trajectory simulate(const Scenario& scenario, const FeedbackPair& pair, const Disturbance& disturbance);

/// build_scenario_pair + make_disturbance + simulate.
Trajectory run(const Scenario& scenario);

struct BatchResult {
  std::optional<Trajectory> trajectory;
  std::string error;
};

/// Runs scenarios concurrently on at most `threads` workers (0: hardware concurrency).
std::vector<BatchResult> run_batch(const std::vector<Scenario>& scenarios, unsigned threads = 0);

}  // namespace bfsmc
