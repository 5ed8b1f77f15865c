#include "bfsmc/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bfsmc/errors.hpp"

namespace bfsmc {

Disturbance::Disturbance(TimeFunction gamma, TimeFunction phi, DisturbanceClass declared,
                         TimeFunction envelope, DisturbanceSpec spec, OracleBounds oracle)
    : gamma_(std::move(gamma)),
      phi_(std::move(phi)),
      declared_(std::move(declared)),
      envelope_(std::move(envelope)),
      spec_(std::move(spec)),
      oracle_(oracle) {}

const std::map<std::string, double>& disturbance_defaults(const std::string& id) {
  static const std::map<std::string, std::map<std::string, double>> defaults = {
      {"affine_phi_sin_gamma", {{"a", 3.0}, {"b", 4.0}, {"c", 3.0}, {"d", 0.5}, {"omega", 5.0}}},
      {"affine_phi_const_gamma", {{"a", 3.0}, {"b", 4.0}, {"c", 2.0}}},
      {"zero", {}},
      {"constant", {{"phi", 0.0}, {"gamma", 1.0}}},
      {"custom-tabulated", {}},
  };
  const auto it = defaults.find(id);
  if (it == defaults.end()) throw ConfigError("unknown disturbance id '" + id + "'");
  return it->second;
}

namespace {

std::map<std::string, double> merged(const std::string& id,
                                     const std::map<std::string, double>& params) {
  std::map<std::string, double> out = disturbance_defaults(id);
  for (const auto& [key, value] : params) {
    if (!out.count(key)) {
      throw ConfigError("disturbance '" + id + "' has no parameter '" + key + "'");
    }
    out[key] = value;
  }
  return out;
}

}  // namespace

Disturbance builtin_disturbance(const std::string& id, const std::map<std::string, double>& params,
                                const std::string& table_path) {
  if (id == "custom-tabulated") {
    if (!params.empty()) throw ConfigError("custom-tabulated takes no numeric parameters");
    if (table_path.empty()) throw ConfigError("custom-tabulated requires a table path");
    return load_tabulated_disturbance(table_path);
  }
  const auto p = merged(id, params);
  DisturbanceSpec spec{id, p, {}};

  if (id == "affine_phi_sin_gamma") {
    const double a = p.at("a"), b = p.at("b"), c = p.at("c"), d = p.at("d"), w = p.at("omega");
    if (b < 0.0) throw ConfigError("affine_phi_sin_gamma: b must be >= 0");
    if (!(c > std::abs(d))) throw ConfigError("affine_phi_sin_gamma: need c > |d| so gamma > 0");
    auto envelope = [b](double t) { return 1.0 + b * t; };
    return Disturbance([c, d, w](double t) { return c + d * std::sin(w * t); },
                       [a, b](double t) { return a * (1.0 + b * t); }, Case1Class{envelope}, envelope,
                       spec, OracleBounds{c - std::abs(d), std::abs(a), std::nullopt});
  }
  if (id == "affine_phi_const_gamma") {
    const double a = p.at("a"), b = p.at("b"), c = p.at("c");
    if (b < 0.0) throw ConfigError("affine_phi_const_gamma: b must be >= 0");
    if (!(c > 0.0)) throw ConfigError("affine_phi_const_gamma: c must be positive");
    auto envelope = [b](double t) { return 1.0 + b * t; };
    return Disturbance([c](double) { return c; }, [a, b](double t) { return a * (1.0 + b * t); },
                       Case2Class{c}, envelope, spec,
                       OracleBounds{c, std::abs(a), std::abs(a * b) / c});
  }
  if (id == "zero") {
    return Disturbance([](double) { return 1.0; }, [](double) { return 0.0; }, Case2Class{1.0},
                       [](double) { return 1.0; }, spec, OracleBounds{1.0, 0.0, 0.0});
  }
  // constant
  const double phi = p.at("phi"), gamma = p.at("gamma");
  if (!(gamma > 0.0)) throw ConfigError("constant: gamma must be positive");
  return Disturbance([gamma](double) { return gamma; }, [phi](double) { return phi; },
                     Case2Class{gamma}, [](double) { return 1.0; }, spec,
                     OracleBounds{gamma, std::abs(phi), 0.0});
}

Disturbance make_disturbance(const DisturbanceSpec& spec) {
  return builtin_disturbance(spec.id, spec.id == "custom-tabulated" ? std::map<std::string, double>{}
                                                                       : spec.params,
                             spec.table_path);
}

namespace {

struct Table {
  std::vector<double> t, phi, gamma, envelope;  // envelope at nodes (running max)

  double interp(const std::vector<double>& y, double s) const {
    if (s <= t.front()) return y.front();
    if (s >= t.back()) return y.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return (1.0 - w) * y[k - 1] + w * y[k];
  }
  double running_max(double s) const {
    if (s <= t.front()) return envelope.front();
    if (s >= t.back()) return envelope.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    return std::max({1.0, envelope[k - 1], std::abs(interp(phi, s))});
  }
};

}  // namespace

Disturbance tabulated_disturbance(std::vector<double> t, std::vector<double> phi,
                                  std::vector<double> gamma, std::string path) {
  if (t.size() < 2 || phi.size() != t.size() || gamma.size() != t.size()) {
    throw ConfigError("tabulated disturbance: need >= 2 rows of equal length");
  }
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (!(t[k] > t[k - 1])) throw ConfigError("tabulated disturbance: t must be strictly increasing");
  }
  auto table = std::make_shared<Table>();
  table->t = std::move(t);
  table->phi = std::move(phi);
  table->gamma = std::move(gamma);
  table->envelope.resize(table->t.size());
  double run = 1.0;
  for (std::size_t k = 0; k < table->t.size(); ++k) {
    run = std::max(run, std::abs(table->phi[k]));
    table->envelope[k] = run;
  }
  const bool constant_gamma =
      std::all_of(table->gamma.begin(), table->gamma.end(),
                  [&](double g) { return g == table->gamma.front(); });
  TimeFunction envelope = [table](double s) { return table->running_max(s); };
  DisturbanceClass declared = constant_gamma ? DisturbanceClass{Case2Class{table->gamma.front()}}
                                             : DisturbanceClass{Case1Class{envelope}};
  Disturbance d([table](double s) { return table->interp(table->gamma, s); },
                [table](double s) { return table->interp(table->phi, s); }, declared, envelope,
                DisturbanceSpec{"custom-tabulated", {}, std::move(path)});
  if (table->t.back() > 0.0) check_declared_class(d, table->t.back());
  return d;
}

Disturbance load_tabulated_disturbance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open disturbance table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty disturbance table '" + path + "'");
  std::vector<double> t, phi, gamma;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected t,phi,gamma");
    }
    try {
      t.push_back(std::stod(a));
      phi.push_back(std::stod(b));
      gamma.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  return tabulated_disturbance(std::move(t), std::move(phi), std::move(gamma), path);
}

double lipschitz_probe(const Disturbance& d, double t0, double t1, int n_intervals) {
  if (!(t1 > t0) || n_intervals < 1) throw DomainError("lipschitz_probe: empty interval");
  const double dt = (t1 - t0) / n_intervals;
  double prev = d.phi(t0) / d.gamma(t0);
  double worst = 0.0;
  for (int k = 1; k <= n_intervals; ++k) {
    const double t = t0 + k * dt;
    const double psi = d.phi(t) / d.gamma(t);
    worst = std::max(worst, std::abs(psi - prev) / dt);
    prev = psi;
  }
  return worst;
}

void check_declared_class(const Disturbance& d, double horizon, int n_points) {
  if (!(horizon > 0.0) || n_points < 2) throw DomainError("check_declared_class: bad grid");
  const double dt = horizon / (n_points - 1);
  if (const auto* c1 = std::get_if<Case1Class>(&d.declared_class())) {
    double prev = 0.0;
    for (int k = 0; k < n_points; ++k) {
      const double t = k * dt;
      const double env = c1->phi_tilde(t);
      if (!(d.gamma(t) > 0.0)) throw ConfigError("Case1 disturbance: gamma(t) <= 0 at t=" + std::to_string(t));
      if (env < 1.0) throw ConfigError("Case1 disturbance: phi_tilde < 1 at t=" + std::to_string(t));
      if (k > 0 && env < prev) throw ConfigError("Case1 disturbance: phi_tilde decreases at t=" + std::to_string(t));
      prev = env;
    }
    return;
  }
  const double gm = std::get<Case2Class>(d.declared_class()).gamma_m;
  if (!(gm > 0.0)) throw ConfigError("Case2 disturbance: gamma_m must be positive");
  for (int k = 0; k < n_points; ++k) {
    const double t = k * dt;
    if (d.gamma(t) != gm) throw ConfigError("Case2 disturbance: gamma is not constant");
  }
  if (!std::isfinite(lipschitz_probe(d, 0.0, horizon, n_points - 1))) {
    throw ConfigError("Case2 disturbance: psi is not Lipschitz on the probe grid");
  }
}

Eigen::VectorXd rhs(double t, const Eigen::VectorXd& z, double u, const Disturbance& d) {
  const Eigen::Index r = z.size();
  Eigen::VectorXd out(r);
  if (r > 1) out.head(r - 1) = z.tail(r - 1);
  out(r - 1) = d.gamma(t) * u + d.phi(t);
  return out;
}

}  // namespace bfsmc
