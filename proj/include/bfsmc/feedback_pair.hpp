#pragma once

// Adapted homogeneous feedback pairs (V, u_r) for the pure chain of
// integrators, a Hong-type recursive construction, and numerical estimation
// of the constants c_r, d_r, c_u together with a property validation suite.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bfsmc/homogeneity.hpp"

namespace bfsmc {

struct EstimatedConstants {
  double c_r = 0.0;  ///< lower bound of rho on the unit level set
  double d_r = 0.0;  ///< upper bound of rho
  double c_u = 0.0;  ///< max of |u_r d_r V| on the unit level set
};

/// Immutable pair (V, u_r). V is homogeneous of degree 2, u_r of degree p_{r+1}.
class FeedbackPair {
 public:
  using ScalarField = std::function<double(const Eigen::VectorXd&)>;
  using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  /// `last_partial` is an optional fast path for the r-th partial of V.
  FeedbackPair(HomogeneityParamsd params, ScalarField value, VectorField gradient,
               ScalarField feedback, Eigen::VectorXd gains,
               ScalarField last_partial = nullptr);

  int r() const noexcept { return params_.r; }
  const HomogeneityParamsd& params() const noexcept { return params_; }
  const Eigen::VectorXd& gains() const noexcept { return gains_; }
  const std::optional<EstimatedConstants>& estimated() const noexcept { return estimated_; }

  double V(const Eigen::VectorXd& z) const { return value_(z); }
  Eigen::VectorXd grad_V(const Eigen::VectorXd& z) const { return gradient_(z); }
  double partial_r(const Eigen::VectorXd& z) const;
  double u_r(const Eigen::VectorXd& z) const { return feedback_(z); }

  FeedbackPair with_estimates(const EstimatedConstants& c) const;

 private:
  HomogeneityParamsd params_;
  ScalarField value_;
  VectorField gradient_;
  ScalarField feedback_;
  ScalarField last_partial_;
  Eigen::VectorXd gains_;
  std::optional<EstimatedConstants> estimated_;
};

/// rho(z) = -<grad V(z), J_r z + u_r(z) e_r> / V(z)^{1 + kappa/2}.
double decay_rate(const FeedbackPair& pair, const Eigen::VectorXd& z);

/// Recursive construction in the style of Hong: with sigma = p,
///   xi_1 = z_1,  xi_k = |z_k|^{sigma/p_k} sgn(z_k) + beta_{k-1}^{sigma/p_k} xi_{k-1},
///   V = 2 sum_k int_{z*_k}^{z_k} |s|^{sigma/p_k} sgn(s) - |z*_k|^{sigma/p_k} sgn(z*_k) ]^{(2-p_k)/sigma} ds,
/// virtual controls z*_{k+1} = -beta_k [xi_k]^{p_{k+1}/sigma}, beta_k = l_k 2^{gamma_k},
/// and u_r = -l_r [d_r V]^{gamma_r}. `gains` holds l_1..l_r. The integrals are
/// evaluated by quadrature; the gradient is analytic up to the same quadrature.
class HongConstruction {
 public:
  HongConstruction(HomogeneityParamsd params, Eigen::VectorXd gains);

  double value(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
  double last_partial(const Eigen::VectorXd& z) const;
  double feedback(const Eigen::VectorXd& z) const;

 private:
  Eigen::VectorXd xi(const Eigen::VectorXd& z) const;

  HomogeneityParamsd params_;
  Eigen::VectorXd gains_;
  Eigen::VectorXd q_;         // sigma / p_k
  Eigen::VectorXd m_;         // (2 - p_k) / sigma
  Eigen::VectorXd beta_pow_;  // beta_{k-1}^{q_k}, entry 0 unused
  double sigma_;
};

/// Builds the pair without checking it (gains may even be zero).
FeedbackPair make_hong_pair(const HomogeneityParamsd& params, const Eigen::VectorXd& gains);

struct SamplingOptions {
  int n_samples = 10000;
  std::uint64_t seed = 1;
};

/// Builds and validates; throws RejectedPairError when rho_min <= 0 and
/// InvalidPairError when another structural check fails. The returned pair
/// carries its estimated constants.
FeedbackPair build_hong_pair(const HomogeneityParamsd& params, const Eigen::VectorXd& gains,
                             const SamplingOptions& options = {});

/// Random points of {V = 1}: Gaussian w, z_i = [w_i]^{p_i}, then dilated onto the level set.
std::vector<Eigen::VectorXd> sample_level_set(const FeedbackPair& pair, int n_samples,
                                              std::uint64_t seed);

/// Dilates z onto {V = 1}. Throws NumericError if that is impossible.
Eigen::VectorXd project_to_level_set(const FeedbackPair& pair, const Eigen::VectorXd& z);

struct RhoBounds {
  double c_r = 0.0;
  double d_r = 0.0;
};

/// Level-set extremes of rho without any sign requirement. The sampled
/// extremes are polished by a compass search on the homogeneous sphere.
RhoBounds sample_rho_range(const FeedbackPair& pair, int n_samples, std::uint64_t seed);

/// Throws InvalidPairError when any sampled rho is <= 0.
RhoBounds estimate_rho_bounds(const FeedbackPair& pair, int n_samples, std::uint64_t seed);

/// max over {V = 1} of |u_r(z) d_r V(z)|.
double estimate_c_u(const FeedbackPair& pair, int n_samples, std::uint64_t seed);

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      ///< worst residual (or rho_min for the decay check)
  double tolerance = 0.0;
  std::size_t samples = 0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double c_u = 0.0;

  bool passed() const;
  const CheckResult* find(std::string_view name) const;
  std::string to_text() const;
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
};

/// Check names.
namespace check {
inline constexpr std::string_view kOrigin = "origin";
inline constexpr std::string_view kPositivity = "positivity";
inline constexpr std::string_view kHomogeneityV = "homogeneity_V";
inline constexpr std::string_view kHomogeneityU = "homogeneity_u";
inline constexpr std::string_view kEuler = "euler_relation";
inline constexpr std::string_view kGradientFd = "gradient_fd";
inline constexpr std::string_view kDilatedGradient = "dilated_gradient";
inline constexpr std::string_view kContinuity = "continuity_u";
inline constexpr std::string_view kSign = "sign_condition";
inline constexpr std::string_view kDecay = "rho_min_positive";
}  // namespace check

/// Never throws on failed checks; failures are reported.
ValidationReport validate_pair(const FeedbackPair& pair, int n_samples, std::uint64_t seed);

struct TuneOptions {
  int n_samples = 2000;
  std::uint64_t seed = 1;
  int max_growth_steps = 60;
};

/// Backstepping-order tuning: for k = 1..r the k-th gain is multiplied by
/// `growth_factor` until the order-k sub-pair has a positive sampled rho_min.
Eigen::VectorXd tune_gains(const HomogeneityParamsd& params, const Eigen::VectorXd& initial_gains,
                           double growth_factor, const TuneOptions& options = {});

}  // namespace bfsmc
