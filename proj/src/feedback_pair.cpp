#include "bfsmc/feedback_pair.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "bfsmc/quadrature.hpp"

namespace bfsmc {

using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// FeedbackPair

FeedbackPair::FeedbackPair(HomogeneityParamsd params, ScalarField value, VectorField gradient,
                           ScalarField feedback, VectorXd gains, ScalarField last_partial)
    : params_(std::move(params)),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      feedback_(std::move(feedback)),
      last_partial_(std::move(last_partial)),
      gains_(std::move(gains)) {}

double FeedbackPair::partial_r(const VectorXd& z) const {
  if (last_partial_) return last_partial_(z);
  return gradient_(z)(params_.r - 1);
}

FeedbackPair FeedbackPair::with_estimates(const EstimatedConstants& c) const {
  FeedbackPair out = *this;
  out.estimated_ = c;
  return out;
}

double decay_rate(const FeedbackPair& pair, const VectorXd& z) {
  const double v = pair.V(z);
  const VectorXd g = pair.grad_V(z);
  VectorXd f = jordan_shift(z);
  f(pair.r() - 1) += pair.u_r(z);
  return -g.dot(f) / std::pow(v, pair.params().decay_exponent());
}

// ---------------------------------------------------------------------------
// HongConstruction

HongConstruction::HongConstruction(HomogeneityParamsd params, VectorXd gains)
    : params_(std::move(params)), gains_(std::move(gains)), sigma_(params_.p) {
  const int r = params_.r;
  if (gains_.size() != r) throw DomainError("Hong pair: expected r gains");
  q_.resize(r);
  m_.resize(r);
  beta_pow_ = VectorXd::Zero(r);
  for (int k = 0; k < r; ++k) {
    const double pk = params_.weights(k);
    q_(k) = sigma_ / pk;
    m_(k) = (2.0 - pk) / sigma_;
  }
  for (int k = 1; k < r; ++k) {
    const double gamma_prev =
        params_.weights(k) / (2.0 - params_.weights(k - 1));  // gamma of level k-1
    const double beta = gains_(k - 1) * std::pow(2.0, gamma_prev);
    beta_pow_(k) = std::pow(beta, q_(k));
  }
}

VectorXd HongConstruction::xi(const VectorXd& z) const {
  const int r = params_.r;
  VectorXd out(r);
  out(0) = signed_power(z(0), q_(0));
  for (int k = 1; k < r; ++k) out(k) = signed_power(z(k), q_(k)) + beta_pow_(k) * out(k - 1);
  return out;
}

double HongConstruction::value(const VectorXd& z) const {
  const int r = params_.r;
  double total = std::pow(std::abs(z(0)), q_(0) * m_(0) + 1.0) / (q_(0) * m_(0) + 1.0);
  double xi_prev = signed_power(z(0), q_(0));
  for (int k = 1; k < r; ++k) {
    const double q = q_(k), m = m_(k);
    const double b = -beta_pow_(k) * xi_prev;
    const double lower = b == 0.0 ? 0.0 : signed_power(b, 1.0 / q);
    auto integrand = [q, m, b](double s) {
      const double d = (s == 0.0 ? 0.0 : signed_power(s, q)) - b;
      return d == 0.0 ? 0.0 : signed_power(d, m);
    };
    total += quad::integrate_split_at_zero(integrand, lower, z(k));
    xi_prev = signed_power(z(k), q) - b;
  }
  return 2.0 * total;
}

VectorXd HongConstruction::gradient(const VectorXd& z) const {
  const int r = params_.r;
  const VectorXd x = xi(z);
  // dxi[k](i) = d xi_k / d z_i
  Eigen::MatrixXd dxi = Eigen::MatrixXd::Zero(r, r);
  VectorXd coupling = VectorXd::Zero(r);  // m_k * I_k * beta_{k-1}^{q_k}
  for (int k = 0; k < r; ++k) {
    const double q = q_(k);
    dxi(k, k) = q * std::pow(std::abs(z(k)), q - 1.0);
    if (k == 0) continue;
    dxi.row(k).head(k) = beta_pow_(k) * dxi.row(k - 1).head(k);
    const double m = m_(k);
    const double b = -beta_pow_(k) * x(k - 1);
    const double lower = b == 0.0 ? 0.0 : signed_power(b, 1.0 / q);
    auto integrand = [q, m, b](double s) {
      const double d = (s == 0.0 ? 0.0 : signed_power(s, q)) - b;
      return std::pow(std::abs(d), m - 1.0);
    };
    const double I = quad::integrate_split_at_zero(integrand, lower, z(k));
    coupling(k) = m * I * beta_pow_(k);
  }
  VectorXd g(r);
  for (int i = 0; i < r; ++i) {
    double acc = signed_power(x(i), m_(i));
    for (int j = i + 1; j < r; ++j) acc += coupling(j) * dxi(j - 1, i);
    g(i) = 2.0 * acc;
  }
  return g;
}

double HongConstruction::last_partial(const VectorXd& z) const {
  const int r = params_.r;
  const double x = xi(z)(r - 1);
  return x == 0.0 ? 0.0 : 2.0 * signed_power(x, m_(r - 1));
}

double HongConstruction::feedback(const VectorXd& z) const {
  const double d = last_partial(z);
  return d == 0.0 ? 0.0 : -gains_(params_.r - 1) * signed_power(d, params_.gamma_r);
}

FeedbackPair make_hong_pair(const HomogeneityParamsd& params, const VectorXd& gains) {
  if (gains.size() != params.r) throw DomainError("make_hong_pair: expected r gains");
  if ((gains.array() < 0.0).any()) throw DomainError("make_hong_pair: gains must be >= 0");
  auto c = std::make_shared<const HongConstruction>(params, gains);
  return FeedbackPair(
      params, [c](const VectorXd& z) { return c->value(z); },
      [c](const VectorXd& z) { return c->gradient(z); },
      [c](const VectorXd& z) { return c->feedback(z); }, gains,
      [c](const VectorXd& z) { return c->last_partial(z); });
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

VectorXd homogeneous_point(const VectorXd& w, const HomogeneityParamsd& params) {
  VectorXd z(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) z(i) = w(i) == 0.0 ? 0.0 : signed_power(w(i), params.weights(i));
  return z;
}

VectorXd gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd w(n);
  for (int i = 0; i < n; ++i) w(i) = normal(rng);
  return w;
}

void require_samples(int n_samples) {
  if (n_samples < 1) throw DomainError("sampling: n_samples must be positive");
}

// Compass search on the homogeneous sphere for an extreme of sign * rho.
double polish_extreme(const FeedbackPair& pair, VectorXd w, double sign) {
  auto objective = [&](const VectorXd& v) {
    const double n = v.norm();
    if (!(n > 0.0)) return std::numeric_limits<double>::infinity();
    const double rho = decay_rate(pair, homogeneous_point(v / n, pair.params()));
    return std::isfinite(rho) ? sign * rho : std::numeric_limits<double>::infinity();
  };
  w /= w.norm();
  double best = objective(w);
  double step = 0.1;
  for (int it = 0; it < 400 && step > 1e-7; ++it) {
    bool improved = false;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        VectorXd trial = w;
        trial(i) += dir * step;
        trial /= trial.norm();
        const double f = objective(trial);
        if (f < best) {
          best = f;
          w = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return sign * best;
}

}  // namespace

VectorXd project_to_level_set(const FeedbackPair& pair, const VectorXd& z) {
  VectorXd out = z;
  for (int it = 0; it < 6; ++it) {
    const double v = pair.V(out);
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw NumericError("project_to_level_set: V is not positive and finite");
    }
    if (std::abs(v - 1.0) < 1e-14) return out;
    // V(delta_eps z) = eps^2 V(z)
    out = dilate(1.0 / std::sqrt(v), out, pair.params());
  }
  const double v = pair.V(out);
  if (std::abs(v - 1.0) > 1e-9) throw NumericError("project_to_level_set: no convergence");
  return out;
}

std::vector<VectorXd> sample_level_set(const FeedbackPair& pair, int n_samples,
                                       std::uint64_t seed) {
  require_samples(n_samples);
  std::mt19937_64 rng(seed);
  std::vector<VectorXd> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  while (static_cast<int>(out.size()) < n_samples) {
    const VectorXd w = gaussian(rng, pair.r());
    if (w.norm() < 1e-12) continue;
    out.push_back(project_to_level_set(pair, homogeneous_point(w, pair.params())));
  }
  return out;
}

RhoBounds sample_rho_range(const FeedbackPair& pair, int n_samples, std::uint64_t seed) {
  require_samples(n_samples);
  std::mt19937_64 rng(seed);
  struct Sample {
    double rho;
    VectorXd w;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    VectorXd w = gaussian(rng, pair.r());
    const double n = w.norm();
    if (n < 1e-12) {
      --i;
      continue;
    }
    w /= n;
    const double rho = decay_rate(pair, homogeneous_point(w, pair.params()));
    if (!std::isfinite(rho)) throw NumericError("sample_rho_range: non-finite rho");
    samples.push_back({rho, w});
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.rho < b.rho; });
  RhoBounds bounds{samples.front().rho, samples.back().rho};
  const std::size_t polish = std::min<std::size_t>(6, samples.size());
  for (std::size_t i = 0; i < polish; ++i) {
    bounds.c_r = std::min(bounds.c_r, polish_extreme(pair, samples[i].w, 1.0));
    bounds.d_r = std::max(bounds.d_r, polish_extreme(pair, samples[samples.size() - 1 - i].w, -1.0));
  }
  return bounds;
}

RhoBounds estimate_rho_bounds(const FeedbackPair& pair, int n_samples, std::uint64_t seed) {
  const RhoBounds b = sample_rho_range(pair, n_samples, seed);
  if (!(b.c_r > 0.0)) {
    throw InvalidPairError("estimate_rho_bounds: sampled rho_min = " + std::to_string(b.c_r) +
                           " is not positive");
  }
  return b;
}

double estimate_c_u(const FeedbackPair& pair, int n_samples, std::uint64_t seed) {
  double c_u = 0.0;
  for (const VectorXd& z : sample_level_set(pair, n_samples, seed)) {
    c_u = std::max(c_u, std::abs(pair.u_r(z) * pair.partial_r(z)));
  }
  return c_u;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::find(std::string_view name) const {
  for (const CheckResult& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  for (const CheckResult& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(18) << c.name
       << " worst=" << c.worst << " tol=" << c.tolerance << " n=" << c.samples << '\n';
  }
  os << "rho in [" << rho_min << ", " << rho_max << "], c_u = " << c_u << '\n';
  os << "overall: " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

std::vector<std::pair<std::string, std::string>> ValidationReport::to_key_values() const {
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> kv;
  for (const CheckResult& c : checks) {
    kv.emplace_back(c.name + ".passed", c.passed ? "true" : "false");
    kv.emplace_back(c.name + ".worst", num(c.worst));
    kv.emplace_back(c.name + ".tolerance", num(c.tolerance));
  }
  kv.emplace_back("rho_min", num(rho_min));
  kv.emplace_back("rho_max", num(rho_max));
  kv.emplace_back("c_u", num(c_u));
  kv.emplace_back("passed", passed() ? "true" : "false");
  return kv;
}

ValidationReport validate_pair(const FeedbackPair& pair, int n_samples, std::uint64_t seed) {
  require_samples(n_samples);
  const HomogeneityParamsd& hp = pair.params();
  const int r = pair.r();
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
  const std::size_t n = static_cast<std::size_t>(n_samples);

  ValidationReport report;
  auto add = [&report](std::string_view name, bool passed, double worst, double tol,
                       std::size_t samples) {
    report.checks.push_back({std::string(name), passed, worst, tol, samples});
  };

  {
    const VectorXd zero = VectorXd::Zero(r);
    const double worst = std::max(std::abs(pair.V(zero)), std::abs(pair.u_r(zero)));
    add(check::kOrigin, worst == 0.0, worst, 0.0, 1);
  }

  double min_v = std::numeric_limits<double>::infinity();
  double hom_v = 0.0, hom_u = 0.0, euler = 0.0, fd = 0.0, dil = 0.0, cont = 0.0;
  double sign_worst = 0.0;
  std::size_t fd_count = 0;
  const double pr1 = hp.output_weight();

  for (std::size_t i = 0; i < n; ++i) {
    VectorXd w = gaussian(rng, r);
    if (w.norm() < 1e-12) continue;
    const VectorXd z = dilate(std::exp(log_scale(rng)), homogeneous_point(w, hp), hp);
    const double eps = std::exp(log_scale(rng));
    const double v = pair.V(z);
    min_v = std::min(min_v, v);
    if (!(v > 0.0)) continue;
    const double scale_u = std::pow(v, pr1 / 2.0);  // natural size of a degree-p_{r+1} quantity

    const VectorXd zd = dilate(eps, z, hp);
    hom_v = std::max(hom_v, std::abs(pair.V(zd) - eps * eps * v) / (eps * eps * v));
    const double u = pair.u_r(z);
    hom_u = std::max(hom_u, std::abs(pair.u_r(zd) - std::pow(eps, pr1) * u) /
                                (std::pow(eps, pr1) * std::max(std::abs(u), scale_u)));

    const VectorXd g = pair.grad_V(z);
    euler = std::max(euler, std::abs(g.dot(euler_vector(z, hp)) - 2.0 * v) / v);

    // delta_eps(grad V(delta_eps z)) = eps^2 grad V(z), compared in the weighted norm.
    const VectorXd lhs = dilate(eps, pair.grad_V(zd), hp);
    double gscale = 0.0;
    for (int k = 0; k < r; ++k) {
      gscale = std::max(gscale, std::abs(g(k)) / std::pow(v, (2.0 - hp.weights(k)) / 2.0));
    }
    for (int k = 0; k < r; ++k) {
      const double unit = eps * eps * std::pow(v, (2.0 - hp.weights(k)) / 2.0) * std::max(gscale, 1e-300);
      dil = std::max(dil, std::abs(lhs(k) - eps * eps * g(k)) / unit);
    }

    // Finite differences need a point away from the coordinate hyperplanes,
    // where V is only once differentiable; redraw the direction if needed.
    {
      VectorXd wf = w / w.norm();
      bool redrawn = false;
      while (!(wf.array().abs() > 1e-2).all()) {
        wf = gaussian(rng, r);
        wf /= std::max(wf.norm(), 1e-300);
        redrawn = true;
      }
      const VectorXd zf = redrawn ? dilate(std::exp(log_scale(rng)), homogeneous_point(wf, hp), hp) : z;
      const VectorXd gf = pair.grad_V(zf);
      VectorXd gfd(r);
      for (int k = 0; k < r; ++k) {
        const double h = 1e-6 * (1.0 + std::abs(zf(k)));
        VectorXd zp = zf, zm = zf;
        zp(k) += h;
        zm(k) -= h;
        gfd(k) = (pair.V(zp) - pair.V(zm)) / (2.0 * h);
      }
      fd = std::max(fd, (gfd - gf).lpNorm<Eigen::Infinity>() / gf.lpNorm<Eigen::Infinity>());
      ++fd_count;
    }

    // Small-perturbation continuity probe of u_r.
    VectorXd zp = z;
    zp(r - 1) += 1e-10 * std::pow(v, hp.weights(r - 1) / 2.0);
    cont = std::max(cont, std::abs(pair.u_r(zp) - u) / scale_u);

    const double s = u * g(r - 1);
    sign_worst = std::max(sign_worst, s / std::pow(v, hp.decay_exponent()));
  }

  add(check::kPositivity, min_v > 0.0, min_v, 0.0, n);
  add(check::kHomogeneityV, hom_v <= 1e-6, hom_v, 1e-6, n);
  add(check::kHomogeneityU, hom_u <= 1e-6, hom_u, 1e-6, n);
  add(check::kEuler, euler <= 1e-6, euler, 1e-6, n);
  add(check::kGradientFd, fd <= 1e-4, fd, 1e-4, fd_count);
  add(check::kDilatedGradient, dil <= 1e-6, dil, 1e-6, n);
  add(check::kContinuity, cont <= 1e-3, cont, 1e-3, n);
  add(check::kSign, sign_worst <= 0.0, sign_worst, 0.0, n);

  const RhoBounds rho = sample_rho_range(pair, n_samples, seed);
  report.rho_min = rho.c_r;
  report.rho_max = rho.d_r;
  add(check::kDecay, rho.c_r > 0.0, rho.c_r, 0.0, n);

  if (std::isfinite(min_v) && min_v > 0.0) report.c_u = estimate_c_u(pair, n_samples, seed);
  return report;
}

FeedbackPair build_hong_pair(const HomogeneityParamsd& params, const VectorXd& gains,
                             const SamplingOptions& options) {
  if (gains.size() != params.r) throw DomainError("build_hong_pair: expected r gains");
  if (!(gains.array() > 0.0).all()) throw DomainError("build_hong_pair: gains must be positive");
  FeedbackPair pair = make_hong_pair(params, gains);
  const ValidationReport report = validate_pair(pair, options.n_samples, options.seed);
  const CheckResult* decay = report.find(check::kDecay);
  if (!decay->passed) {
    throw RejectedPairError("build_hong_pair: gains too small, rho_min = " +
                            std::to_string(report.rho_min));
  }
  if (!report.passed()) {
    throw InvalidPairError("build_hong_pair: validation failed\n" + report.to_text());
  }
  return pair.with_estimates({report.rho_min, report.rho_max, report.c_u});
}

VectorXd tune_gains(const HomogeneityParamsd& params, const VectorXd& initial_gains,
                    double growth_factor, const TuneOptions& options) {
  if (!(growth_factor > 1.0)) throw DomainError("tune_gains: growth_factor must exceed 1");
  if (initial_gains.size() != params.r) throw DomainError("tune_gains: expected r gains");
  if (!(initial_gains.array() > 0.0).all()) throw DomainError("tune_gains: gains must be positive");
  VectorXd gains = initial_gains;
  int steps = 0;
  for (int k = 1; k <= params.r; ++k) {
    const HomogeneityParamsd sub = make_params(k, params.p, params.kappa);
    while (true) {
      const FeedbackPair pair = make_hong_pair(sub, gains.head(k));
      if (sample_rho_range(pair, options.n_samples, options.seed).c_r > 0.0) break;
      if (++steps > options.max_growth_steps) {
        throw TuningError("tune_gains: retry cap exceeded at level " + std::to_string(k));
      }
      gains(k - 1) *= growth_factor;
    }
  }
  return gains;
}

}  // namespace bfsmc
