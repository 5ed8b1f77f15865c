#include <doctest.h>

#include "bfsmc/analysis.hpp"

using namespace bfsmc;

namespace {

Trajectory synthetic(double growth_late) {
  Trajectory tr(1, ControllerKind::Case1);
  for (int i = 0; i <= 100; ++i) {
    Trajectory::Row row;
    row.t = 0.1 * i;
    row.bound = 1.0;
    row.V = i < 20 ? 2.0 - 0.1 * i : 0.4;
    row.phase = i < 20 ? "searching" : "barrier";
    row.L = i < 20 ? 1.0 + row.t : 3.0 + (i > 80 ? growth_late : 0.0);
    row.u = 0.01 * i;
    tr.push_back(row, Eigen::VectorXd::Constant(1, row.V));
  }
  tr.events.push_back({"crossing", 2.0, {{"V", 0.5}, {"gain_before", 3.0}, {"gain_after", 3.0}}});
  return tr;
}

}  // namespace

TEST_CASE("containment and gain windows") {
  const AnalysisReport rep = analyze(synthetic(0.0));
  REQUIRE(rep.t_bar);
  CHECK(*rep.t_bar == 2.0);
  CHECK(rep.containment());
  CHECK(*rep.max_excess == doctest::Approx(-0.6));
  CHECK(*rep.crossing_gain_jump == 0.0);
  CHECK(rep.gains.at("L").ratio() == doctest::Approx(1.0));
  CHECK(rep.max_u_jump == doctest::Approx(0.01));
  CHECK_FALSE(rep.c1_hat);  // no metadata to rebuild the schedule
  CHECK(analyze(synthetic(6.0)).gains.at("L").ratio() == doctest::Approx(3.0));
}

TEST_CASE("violations fail containment") {
  Trajectory tr = synthetic(0.0);
  tr.V[50] = 1.0;
  CHECK_FALSE(analyze(tr).containment());
  tr = synthetic(0.0);
  tr.events.push_back({"escape", 5.0, {}});
  CHECK_FALSE(analyze(tr).containment());
  tr = synthetic(0.0);
  tr.events.clear();
  const AnalysisReport rep = analyze(tr);
  CHECK_FALSE(rep.t_bar);
  CHECK_FALSE(rep.containment());
  CHECK(rep.gains.empty());
  CHECK(rep.to_text().find("containment       fail") != std::string::npos);
}
