#pragma once
// Post-processing of a recorded trajectory: containment after the crossing,
// gain boundedness trends, the tail fit V <= (1 - C1 alpha~) mu, and
// control continuity.

#include <map>
#include <optional>
#include <string>

#include "bfsmc/simulation.hpp"

namespace bfsmc {

/// Max of a gain trace on the first and last quarter of [t_bar, t_end].
struct GainTrend {
  double sup = 0.0;
  double first_window_max = 0.0;
  double last_window_max = 0.0;
  double ratio() const { return first_window_max > 0.0 ? last_window_max / first_window_max : 0.0; }
};

struct AnalysisReport {
  std::string controller;
  std::size_t rows = 0;
  double t_end = 0.0;
  double final_V = 0.0;
  std::optional<double> t_bar;
  std::size_t crossings = 0;
  std::size_t escapes = 0;
  std::size_t blowups = 0;          ///< non-finite state or barrier blow-up
  std::optional<double> max_excess;  ///< max of V - bound on grid points t >= t_bar
  std::optional<double> min_excess;
  std::optional<double> crossing_gain_jump;  ///< relative jump of the gain at t_bar
  std::map<std::string, GainTrend> gains;    ///< "L", or "L1" and "L2"
  std::optional<double> xi_before_t_bar;     ///< max |xi| on t < t_bar (host)
  std::optional<double> c1_hat;              ///< min of (1 - V/mu)/alpha~ over the final third
  double max_u_jump = 0.0;                   ///< max |u(t+h) - u(t)|

  /// Crossing reached, no escape or blow-up, V < bound at every grid point after t_bar.
  bool containment() const;
  std::string to_text() const;
};

AnalysisReport analyze(const Trajectory& trajectory);

}  // namespace bfsmc
