#pragma once

// Perturbed chain of integrators  z_i' = z_{i+1},  z_r' = gamma(t) u + phi(t),
// and a catalog of time-only disturbances.

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bfsmc {

using TimeFunction = std::function<double(double)>;

/// Unbounded perturbation with a known envelope: |phi| <= phi_M * phi_tilde(t).
struct Case1Class {
  TimeFunction phi_tilde;  ///< >= 1, non-decreasing
};

/// Constant control gain and Lipschitz psi = phi / gamma.
struct Case2Class {
  double gamma_m = 1.0;
};

using DisturbanceClass = std::variant<Case1Class, Case2Class>;

/// Catalog id plus parameters, enough to rebuild the disturbance.
struct DisturbanceSpec {
  std::string id = "zero";
  std::map<std::string, double> params;
  std::string table_path;  ///< custom-tabulated only
};

/// Bounds known to test oracles only; controllers never see them.
struct OracleBounds {
  std::optional<double> gamma_m;
  std::optional<double> phi_M;
  std::optional<double> psi_M;
};

class Disturbance {
 public:
  Disturbance(TimeFunction gamma, TimeFunction phi, DisturbanceClass declared,
              TimeFunction envelope, DisturbanceSpec spec, OracleBounds oracle = {});

  double gamma(double t) const { return gamma_(t); }
  double phi(double t) const { return phi_(t); }
  /// Envelope phi_tilde(t) used by the diagnostics; defined for both classes.
  double phi_tilde(double t) const { return envelope_(t); }
  const DisturbanceClass& declared_class() const noexcept { return declared_; }
  bool is_case2() const noexcept { return std::holds_alternative<Case2Class>(declared_); }
  const DisturbanceSpec& spec() const noexcept { return spec_; }
  const OracleBounds& oracle() const noexcept { return oracle_; }

 private:
  TimeFunction gamma_;
  TimeFunction phi_;
  DisturbanceClass declared_;
  TimeFunction envelope_;
  DisturbanceSpec spec_;
  OracleBounds oracle_;
};

/// Ids accepted by builtin_disturbance.
inline const std::vector<std::string>& disturbance_ids() {
  static const std::vector<std::string> ids = {"affine_phi_sin_gamma", "affine_phi_const_gamma",
                                               "zero", "constant", "custom-tabulated"};
  return ids;
}

/// Parameter names (with defaults) of each catalog entry.
const std::map<std::string, double>& disturbance_defaults(const std::string& id);

/// Builds a catalog disturbance. Unknown ids or parameter names raise ConfigError.
///   affine_phi_sin_gamma(a, b, c, d, omega): phi = a(1 + b t), gamma = c + d sin(omega t)
///   affine_phi_const_gamma(a, b, c):         phi = a(1 + b t), gamma = c
///   zero:                                    phi = 0, gamma = 1
///   constant(phi, gamma)
///   custom-tabulated:                        linear interpolation of a t,phi,gamma table
Disturbance builtin_disturbance(const std::string& id, const std::map<std::string, double>& params = {},
                                const std::string& table_path = {});
Disturbance make_disturbance(const DisturbanceSpec& spec);

/// Tabulated disturbance from samples (t strictly increasing). Values are held
/// constant outside the table. gamma constant => Case2, otherwise Case1 with the
/// running-max envelope max(1, sup_{s<=t} |phi(s)|).
Disturbance tabulated_disturbance(std::vector<double> t, std::vector<double> phi,
                                  std::vector<double> gamma, std::string path = {});
/// Loads a CSV with header t,phi,gamma.
Disturbance load_tabulated_disturbance(const std::string& path);

/// Max of |psi(t_{k+1}) - psi(t_k)| / dt over a uniform grid, psi = phi / gamma.
double lipschitz_probe(const Disturbance& d, double t0, double t1, int n_intervals = 10000);

/// Probes the declared-class invariants on [0, horizon]; throws ConfigError on violation.
void check_declared_class(const Disturbance& d, double horizon, int n_points = 2001);

/// (z_2, ..., z_r, gamma(t) u + phi(t)).
Eigen::VectorXd rhs(double t, const Eigen::VectorXd& z, double u, const Disturbance& d);

}  // namespace bfsmc
