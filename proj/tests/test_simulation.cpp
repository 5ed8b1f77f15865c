#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bfsmc/analysis.hpp"
#include "bfsmc/scenario_io.hpp"
#include "bfsmc/simulation.hpp"

using namespace bfsmc;
using Eigen::VectorXd;

namespace {

Scenario scalar_scenario(ControllerKind kind) {
  Scenario sc;
  sc.name = "scalar";
  sc.pair.r = 1;
  sc.pair.p = 1.0;
  sc.pair.kappa = -0.5;
  sc.pair.gains = VectorXd::Ones(1);
  sc.controller.kind = kind;
  sc.z0 = VectorXd::Ones(1);
  sc.horizon = 2.0;
  sc.validation_samples = 200;
  return sc;
}

}  // namespace

TEST_CASE("scenario invariants") {
  Scenario sc = scalar_scenario(ControllerKind::PureChain);
  CHECK_NOTHROW(sc.validate());
  sc.h = 0.0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = scalar_scenario(ControllerKind::PureChain);
  sc.horizon = sc.h / 2;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = scalar_scenario(ControllerKind::PureChain);
  sc.z0 = VectorXd::Ones(2);
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = scalar_scenario(ControllerKind::PureChain);
  sc.pair.kappa = 0.2;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  CHECK(controller_kind_from_string("host") == ControllerKind::Host);
  CHECK_THROWS_AS(controller_kind_from_string("pid"), ConfigError);
}

TEST_CASE("scalar anchor reaches the origin at sqrt 2") {
  const Trajectory tr = run(scalar_scenario(ControllerKind::PureChain));
  REQUIRE(tr.size() == 20001);
  CHECK(tr.t[1] - tr.t[0] == doctest::Approx(1e-4));
  std::size_t first = tr.size();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (std::abs(tr.z(i)(0)) <= 1e-6) {
      first = i;
      break;
    }
  }
  REQUIRE(first < tr.size());
  CHECK(std::abs(tr.t[first] - std::sqrt(2.0)) <= 2e-3);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t[i] >= std::sqrt(2.0) + 0.01) CHECK(tr.V[i] <= 1e-9);
    if (i > 0) CHECK(tr.V[i] <= tr.V[i - 1] + 1e-9);
  }
  CHECK(tr.events.empty());
}

TEST_CASE("open loop diverges without crossing") {
  Scenario sc = scalar_scenario(ControllerKind::OpenLoop);
  sc.pair.r = 3;
  sc.pair.kappa = -1.0 / 6.0;
  sc.pair.gains = Eigen::Vector3d(0.5, 1, 4);
  sc.z0 = Eigen::Vector3d(1, 1, -1);
  sc.disturbance = {"affine_phi_const_gamma", {}, {}};
  sc.horizon = 5.0;
  sc.h = 1e-3;
  const Trajectory tr = run(sc);
  CHECK(tr.count_events("crossing") == 0);
  CHECK(tr.z(tr.size() - 1)(2) > 100.0);
  CHECK(tr.u.back() == 0.0);
}

TEST_CASE("case-1 crossing is refined and the gain continuous") {
  Scenario sc = scalar_scenario(ControllerKind::Case1);
  sc.z0 = VectorXd::Constant(1, 2.0);
  sc.controller.mu0 = 5.0;
  sc.controller.lambda = 0.2;
  sc.disturbance = {"constant", {{"phi", 0.3}, {"gamma", 1.0}}, {}};
  sc.horizon = 5.0;
  const FeedbackPair pair = build_scenario_pair(sc);
  const Trajectory tr = run(sc);
  REQUIRE(tr.count_events("crossing") == 1);
  const Event& e = *tr.find_event("crossing");
  const double mu = 5.0 * std::exp(-0.2 * e.t);
  const double V = *e.get("V");
  CHECK(V - mu / 2 <= 0.0);
  CHECK(V - mu / 2 >= -1e-6 * mu);
  CHECK(std::abs(*e.get("gain_after") - *e.get("gain_before")) <= 1e-9 * *e.get("gain_before"));
  CHECK(*e.get("c_bar") == doctest::Approx(*e.get("gain_before") / std::pow(2.0, pair.params().barrier_exponent())));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t[i] < e.t) {
      CHECK(tr.phase[i] == "searching");
      CHECK(tr.L[i] == doctest::Approx(1.0 + tr.t[i]));
    } else {
      CHECK(tr.phase[i] == "barrier");
      CHECK(tr.V[i] < tr.bound[i]);
    }
  }
  CHECK(analyze(tr).containment());
}

TEST_CASE("start inside the target set gives t_bar = 0") {
  Scenario sc = scalar_scenario(ControllerKind::Case1);
  sc.z0 = VectorXd::Constant(1, 0.5);
  sc.horizon = 0.5;
  const Trajectory tr = run(sc);
  REQUIRE(tr.find_event("crossing"));
  CHECK(tr.find_event("crossing")->t == 0.0);
  CHECK(tr.phase.front() == "barrier");
}

TEST_CASE("host integral state stays zero before crossing") {
  Scenario sc = scalar_scenario(ControllerKind::Host);
  sc.z0 = VectorXd::Constant(1, 2.0);
  sc.controller.epsilon = 0.5;
  sc.disturbance = {"affine_phi_const_gamma", {{"a", 0.5}, {"b", 1.0}, {"c", 2.0}}, {}};
  sc.horizon = 8.0;
  const Trajectory tr = run(sc);
  REQUIRE(tr.find_event("crossing"));
  const double t_bar = tr.find_event("crossing")->t;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t[i] < t_bar) {
      CHECK(tr.xi[i] == 0.0);
      CHECK(tr.L2[i] == 0.0);
    } else {
      CHECK(tr.L2[i] >= 1.0);
      CHECK(tr.L2[i] == doctest::Approx(0.5 / (0.5 - tr.V[i])));
    }
  }
  const AnalysisReport rep = analyze(tr);
  CHECK(rep.containment());
  REQUIRE(rep.xi_before_t_bar);
  CHECK(*rep.xi_before_t_bar == 0.0);
  CHECK(rep.max_u_jump < 0.05);
}

TEST_CASE("escape and blow-up terminate the run") {
  // A tiny fixed gain cannot hold V below mu against a large constant drift.
  Scenario sc = scalar_scenario(ControllerKind::Case1);
  sc.z0 = VectorXd::Constant(1, 0.5);
  sc.controller.lambda = 0.0;
  sc.controller.mu0 = 1.0;
  sc.controller.growth = {1.0, 0.0, 0.0};
  sc.disturbance = {"constant", {{"phi", 1e4}, {"gamma", 1.0}}, {}};
  sc.h = 1e-2;
  const Trajectory tr = run(sc);
  CHECK(tr.count_events("escape") + tr.count_events("barrier_blowup") == 1);
  CHECK(tr.t.back() < sc.horizon);
  CHECK_FALSE(analyze(tr).containment());
}

TEST_CASE("determinism and batch execution") {
  Scenario sc = scalar_scenario(ControllerKind::Case1);
  sc.z0 = VectorXd::Constant(1, 2.0);
  sc.disturbance = {"affine_phi_sin_gamma", {}, {}};
  sc.horizon = 1.0;
  std::ostringstream a, b;
  write_csv(run(sc), a);
  write_csv(run(sc), b);
  CHECK(a.str() == b.str());

  std::vector<Scenario> many(4, sc);
  many[2].h = -1.0;
  const auto results = run_batch(many, 3);
  REQUIRE(results.size() == 4);
  CHECK_FALSE(results[2].trajectory);
  CHECK_FALSE(results[2].error.empty());
  std::ostringstream c;
  REQUIRE(results[3].trajectory);
  write_csv(*results[3].trajectory, c);
  CHECK(c.str() == a.str());
}
