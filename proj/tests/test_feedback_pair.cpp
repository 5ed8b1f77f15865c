#include <doctest.h>

#include <cmath>
#include <random>

#include "bfsmc/feedback_pair.hpp"
#include "oracle.hpp"

using namespace bfsmc;
using Eigen::VectorXd;

namespace {

const double kSqrt8 = std::pow(2.0, 1.5);

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

FeedbackPair scalar_pair() { return make_hong_pair(make_params(1, 1.0, -0.5), vec({1.0})); }

}  // namespace

TEST_CASE("scalar pair in closed form") {
  const FeedbackPair pair = scalar_pair();
  for (double z : {-3.0, -0.4, 0.0, 0.25, 2.0}) {
    CHECK(pair.V(vec({z})) == doctest::Approx(z * z).epsilon(1e-13));
    CHECK(pair.grad_V(vec({z}))(0) == doctest::Approx(2 * z).epsilon(1e-13));
    CHECK(pair.u_r(vec({z})) == doctest::Approx(-signed_power(2 * z, 0.5)).epsilon(1e-13));
  }
  CHECK(pair.u_r(vec({2.0})) == doctest::Approx(-2.0));
  CHECK(decay_rate(pair, vec({0.7})) == doctest::Approx(kSqrt8).epsilon(1e-12));
  CHECK(decay_rate(pair, vec({-5.0})) == doctest::Approx(kSqrt8).epsilon(1e-12));

  const RhoBounds b = estimate_rho_bounds(pair, 200, 1);
  CHECK(std::abs(b.c_r - kSqrt8) < 1e-9);
  CHECK(std::abs(b.d_r - kSqrt8) < 1e-9);
  CHECK(estimate_c_u(pair, 200, 1) == doctest::Approx(kSqrt8).epsilon(1e-9));

  const ValidationReport rep = validate_pair(pair, 1000, 1);
  CHECK(rep.passed());
  for (const auto& c : rep.checks) {
    if (c.name != check::kDecay && c.name != check::kPositivity) CHECK_MESSAGE(c.worst < 1e-8, c.name);
  }
}

TEST_CASE("zero gain cannot decrease V") {
  const FeedbackPair pair = make_hong_pair(make_params(1, 1.0, -0.5), vec({0.0}));
  const ValidationReport rep = validate_pair(pair, 500, 1);
  CHECK_FALSE(rep.passed());
  REQUIRE(rep.find(check::kDecay));
  CHECK_FALSE(rep.find(check::kDecay)->passed);
  CHECK_THROWS_AS(estimate_rho_bounds(pair, 500, 1), InvalidPairError);
}

TEST_CASE("recursive V against independent quadrature") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  const VectorXd l = vec({0.5, 1.0, 4.0});
  const FeedbackPair pair = make_hong_pair(hp, l);
  // High-precision reference values of V.
  CHECK(pair.V(vec({1, 1, -1})) == doctest::Approx(8.2747302685729533621).epsilon(1e-10));
  CHECK(pair.V(vec({0.3, -0.7, 0.2})) == doctest::Approx(0.50471953770102349428).epsilon(1e-10));
  CHECK(pair.V(vec({-2, 0.5, 1.5})) == doctest::Approx(5.5287058568713436795).epsilon(1e-10));

  const FeedbackPair pair2 = make_hong_pair(make_params(2, 1.0, -0.25), vec({1.0, 2.0}));
  CHECK(pair2.V(vec({1, -1})) == doctest::Approx(1.6261487025246663909).epsilon(1e-10));
  CHECK(pair2.V(vec({0.4, 0.9})) == doctest::Approx(3.0390678715157537336).epsilon(1e-10));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (int k = 0; k < 200; ++k) {
    const VectorXd z = vec({N(rng), N(rng), N(rng)});
    const double ref = oracle::hong_value(z, {0.5, 1.0, 4.0}, 1.0, -1.0 / 6.0);
    CHECK(pair.V(z) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("gradient against finite differences of the reference V") {
  const std::vector<double> l = {0.5, 1.0, 4.0};
  const FeedbackPair pair = make_hong_pair(make_params(3, 1.0, -1.0 / 6.0), vec({0.5, 1.0, 4.0}));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  int compared = 0;
  for (int k = 0; k < 100; ++k) {
    const VectorXd z = vec({N(rng), N(rng), N(rng)});
    if ((z.array().abs() < 1e-2).any()) continue;
    const VectorXd fd =
        oracle::fd_gradient([&](const VectorXd& y) { return oracle::hong_value(y, l, 1.0, -1.0 / 6.0); }, z);
    const VectorXd g = pair.grad_V(z);
    CHECK((g - fd).norm() <= 1e-4 * (1.0 + fd.norm()));
    CHECK(pair.partial_r(z) == doctest::Approx(g(2)).epsilon(1e-12));
    CHECK(pair.u_r(z) == doctest::Approx(-4.0 * signed_power(g(2), 3.0 / 8.0)).epsilon(1e-12));
    ++compared;
  }
  CHECK(compared > 80);
}

TEST_CASE("homogeneity properties on random points") {
  for (int r : {2, 3}) {
    const auto hp = make_params(r, 1.0, -1.0 / 6.0);
    const VectorXd gains = tune_gains(hp, VectorXd::Ones(r), 2.0);
    const FeedbackPair pair = make_hong_pair(hp, gains);
    std::mt19937_64 rng(17 + r);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> E(0.1, 10.0);
    for (int k = 0; k < 1000; ++k) {
      VectorXd z(r);
      for (int i = 0; i < r; ++i) z(i) = N(rng);
      const double eps = E(rng);
      const VectorXd dz = dilate(eps, z, hp);
      const double v = pair.V(z);
      CHECK(std::abs(pair.V(dz) - eps * eps * v) <= 1e-6 * eps * eps * v);
      const double u = pair.u_r(z);
      CHECK(std::abs(pair.u_r(dz) - std::pow(eps, hp.output_weight()) * u) <=
            1e-6 * std::pow(eps, hp.output_weight()) * std::abs(u) + 1e-300);
      const VectorXd g = pair.grad_V(z);
      CHECK(std::abs(g.dot(euler_vector(z, hp)) - 2 * v) <= 1e-6 * v);
      const VectorXd lhs = dilate(eps, pair.grad_V(dz), hp);
      CHECK((lhs - eps * eps * g).norm() <= 1e-6 * eps * eps * g.norm());
      CHECK(u * g(r - 1) <= 0.0);
      if (k < 100) {
        CHECK(decay_rate(pair, dz) == doctest::Approx(decay_rate(pair, z)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("c_u bound off the level set") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  const FeedbackPair pair = build_hong_pair(hp, vec({0.5, 1.0, 4.0}), {4000, 1});
  REQUIRE(pair.estimated());
  const double c_u = pair.estimated()->c_u;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> N;
  for (int k = 0; k < 10000; ++k) {
    const VectorXd z = vec({N(rng), N(rng), N(rng)});
    const double lhs = std::abs(pair.u_r(z) * pair.partial_r(z));
    // The sampled maximum may miss the true one by a small relative amount.
    CHECK(lhs <= c_u * std::pow(pair.V(z), hp.decay_exponent()) * 1.01 + 1e-9);
  }
}

TEST_CASE("build and tune") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  CHECK_THROWS_AS(build_hong_pair(hp, vec({1.0, 1.0, 1.0}), {2000, 1}), RejectedPairError);
  CHECK_THROWS_AS(build_hong_pair(hp, vec({1.0, 0.0, 1.0}), {2000, 1}), DomainError);
  CHECK_THROWS_AS(build_hong_pair(hp, vec({1.0, 1.0}), {2000, 1}), DomainError);

  CHECK(tune_gains(make_params(1, 1.0, -0.5), vec({1.0}), 2.0)(0) == 1.0);
  const VectorXd tiny = VectorXd::Constant(3, 1e-3);
  const VectorXd tuned = tune_gains(hp, tiny, 2.0);
  CHECK((tuned.array() >= tiny.array()).all());
  CHECK((tuned.array() > tiny.array()).any());
  CHECK(validate_pair(make_hong_pair(hp, tuned), 2000, 9).passed());
  CHECK_THROWS_AS(tune_gains(hp, tiny, 1.0), DomainError);
  CHECK_THROWS_AS(tune_gains(hp, tiny, 2.0, {2000, 1, 2}), TuningError);
  CHECK_THROWS_AS(estimate_rho_bounds(scalar_pair(), 0, 1), DomainError);
}

TEST_CASE("level-set sampling is seeded") {
  const FeedbackPair pair = make_hong_pair(make_params(2, 1.0, -0.25), vec({1.0, 2.0}));
  const auto a = sample_level_set(pair, 50, 4);
  const auto b = sample_level_set(pair, 50, 4);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(pair.V(a[i]) == doctest::Approx(1.0).epsilon(1e-10));
  }
  const ValidationReport rep = validate_pair(pair, 500, 4);
  CHECK(rep.to_text().find("overall") != std::string::npos);
  CHECK_FALSE(rep.to_key_values().empty());
}
