#include "bfsmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bfsmc/errors.hpp"

namespace bfsmc {

namespace {

GainTrend trend(const std::vector<double>& t, const std::vector<double>& g, double t_bar) {
  GainTrend out;
  if (g.empty()) return out;
  out.sup = *std::max_element(g.begin(), g.end());
  const double span = t.back() - t_bar;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_bar) continue;
    if (t[i] <= t_bar + 0.25 * span) out.first_window_max = std::max(out.first_window_max, g[i]);
    if (t[i] >= t_bar + 0.75 * span) out.last_window_max = std::max(out.last_window_max, g[i]);
  }
  return out;
}

double meta_num(const Trajectory& tr, const std::string& key) {
  auto it = tr.meta.find(key);
  if (it == tr.meta.end()) throw ConfigError("trajectory metadata lacks '" + key + "'");
  return std::stod(it->second);
}

// Rebuilds the schedule and envelope from metadata; nullopt if they are unavailable.
std::optional<double> fit_c1(const Trajectory& tr, double t_bar) {
  if (tr.kind() != ControllerKind::Case1) return std::nullopt;
  try {
    const auto params =
        make_params(static_cast<int>(meta_num(tr, "r")), meta_num(tr, "p"), meta_num(tr, "kappa"));
    const MuSchedule mu = MuSchedule::exponential(meta_num(tr, "mu0"), meta_num(tr, "lambda"));
    DisturbanceSpec spec;
    spec.id = tr.meta.at("disturbance.id");
    for (const auto& [k, v] : tr.meta) {
      if (k.rfind("disturbance.", 0) == 0 && k != "disturbance.id" && k != "disturbance.table") {
        spec.params[k.substr(12)] = std::stod(v);
      }
    }
    if (auto it = tr.meta.find("disturbance.table"); it != tr.meta.end()) spec.table_path = it->second;
    const Disturbance d = make_disturbance(spec);
    const TimeFunction envelope = [&d](double s) { return d.phi_tilde(s); };
    const double t_end = tr.t.back();
    const double start = std::max(t_bar, t_end - (t_end - tr.t.front()) / 3.0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.t[i] < start) continue;
      const double a = alpha_tilde(tr.t[i], mu, envelope, params);
      best = std::min(best, (1.0 - tr.V[i] / mu(tr.t[i])) / a);
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

bool AnalysisReport::containment() const {
  return t_bar && escapes == 0 && blowups == 0 && max_excess && *max_excess < 0.0;
}

AnalysisReport analyze(const Trajectory& tr) {
  AnalysisReport rep;
  rep.controller = to_string(tr.kind());
  rep.rows = tr.size();
  rep.crossings = tr.count_events("crossing");
  rep.escapes = tr.count_events("escape");
  rep.blowups = tr.count_events("blowup") + tr.count_events("barrier_blowup");
  if (tr.empty()) return rep;
  rep.t_end = tr.t.back();
  rep.final_V = tr.V.back();
  for (std::size_t i = 1; i < tr.size(); ++i) {
    rep.max_u_jump = std::max(rep.max_u_jump, std::abs(tr.u[i] - tr.u[i - 1]));
  }

  const Event* crossing = tr.find_event("crossing");
  if (!crossing) return rep;
  const double t_bar = crossing->t;
  rep.t_bar = t_bar;
  if (auto before = crossing->get("gain_before"), after = crossing->get("gain_after");
      before && after && *before != 0.0) {
    rep.crossing_gain_jump = std::abs(*after - *before) / std::abs(*before);
  }
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr.t[i] < t_bar) continue;
    const double e = tr.V[i] - tr.bound[i];
    rep.max_excess = rep.max_excess ? std::max(*rep.max_excess, e) : e;
    rep.min_excess = rep.min_excess ? std::min(*rep.min_excess, e) : e;
  }
  if (tr.is_host()) {
    rep.gains["L1"] = trend(tr.t, tr.L1, t_bar);
    rep.gains["L2"] = trend(tr.t, tr.L2, t_bar);
    double m = 0.0;
    for (std::size_t i = 0; i < tr.size() && tr.t[i] < t_bar; ++i) m = std::max(m, std::abs(tr.xi[i]));
    rep.xi_before_t_bar = m;
  } else {
    rep.gains["L"] = trend(tr.t, tr.L, t_bar);
  }
  rep.c1_hat = fit_c1(tr, t_bar);
  return rep;
}

std::string AnalysisReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10);
  auto opt = [&](const std::optional<double>& v) -> std::ostream& {
    if (v) return os << *v;
    return os << "n/a";
  };
  os << "controller        " << controller << '\n';
  os << "rows              " << rows << '\n';
  os << "t_end             " << t_end << '\n';
  os << "final_V           " << final_V << '\n';
  os << "t_bar             ";
  opt(t_bar) << '\n';
  os << "crossings         " << crossings << '\n';
  os << "escapes           " << escapes << '\n';
  os << "blowups           " << blowups << '\n';
  os << "max(V-bound)      ";
  opt(max_excess) << '\n';
  os << "min(V-bound)      ";
  opt(min_excess) << '\n';
  os << "containment       " << (containment() ? "pass" : "fail") << '\n';
  os << "gain_jump_at_t_bar ";
  opt(crossing_gain_jump) << '\n';
  for (const auto& [name, g] : gains) {
    os << "gain " << name << "  sup " << g.sup << "  first_window " << g.first_window_max
       << "  last_window " << g.last_window_max << "  ratio " << g.ratio() << '\n';
  }
  if (xi_before_t_bar) os << "max|xi| before t_bar " << *xi_before_t_bar << '\n';
  os << "C1_hat            ";
  opt(c1_hat) << '\n';
  os << "max|du|           " << max_u_jump << '\n';
  return os.str();
}

}  // namespace bfsmc
