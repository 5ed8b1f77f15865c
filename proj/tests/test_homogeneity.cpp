#include <doctest.h>

#include <random>

#include "bfsmc/homogeneity.hpp"

using namespace bfsmc;

TEST_CASE("signed power") {
  CHECK(signed_power(-8.0, 1.0 / 3.0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(signed_power(0.0, 0.5) == 0.0);
  CHECK(signed_power(-2.0, 2.0) == -4.0);
  CHECK_THROWS_AS(signed_power(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(signed_power(1.0, -1.0), DomainError);
}

TEST_CASE("signed power round trip and monotonicity") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> X(-10.0, 10.0), A(0.2, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = X(rng), a = A(rng);
    CHECK(signed_power(signed_power(x, a), 1.0 / a) == doctest::Approx(x).epsilon(1e-10));
    CHECK(signed_power(x, a) <= signed_power(x + 1e-3, a));
    CHECK(signed_power(-x, a) == -signed_power(x, a));
  }
}

TEST_CASE("weights and output exponent") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  REQUIRE(hp.weights.size() == 4);
  CHECK(hp.weights(0) == doctest::Approx(1.0));
  CHECK(hp.weights(1) == doctest::Approx(5.0 / 6.0));
  CHECK(hp.weights(2) == doctest::Approx(2.0 / 3.0));
  CHECK(hp.weights(3) == doctest::Approx(0.5));
  CHECK(hp.gamma_r == doctest::Approx(3.0 / 8.0));
  CHECK(hp.barrier_exponent() == doctest::Approx(11.0 / 32.0));

  const auto one = make_params(1, 1.0, -0.5);
  CHECK(one.weights(1) == doctest::Approx(0.5));
  CHECK(one.gamma_r == doctest::Approx(0.5));
}

TEST_CASE("parameter domain") {
  CHECK_THROWS_AS(make_params(3, 1.0, -0.6), InfeasibleWeightsError);
  CHECK_THROWS_AS(make_params(3, 1.0, 0.2), DomainError);
  CHECK_THROWS_AS(make_params(3, 2.5, -0.1), DomainError);
  CHECK_THROWS_AS(make_params(0, 1.0, -0.1), DomainError);
}

TEST_CASE("dilation") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  const Eigen::Vector3d ones(1, 1, 1);
  const Eigen::VectorXd d = dilate(4.0, ones, hp);
  CHECK(d(0) == doctest::Approx(4.0));
  CHECK(d(1) == doctest::Approx(3.1748021039364));
  CHECK(d(2) == doctest::Approx(2.51984209978975));
  CHECK(dilate(1.0, Eigen::Vector3d(0.3, -2, 5), hp).isApprox(Eigen::Vector3d(0.3, -2, 5)));
  CHECK(dilate(2.0, Eigen::VectorXd::Constant(1, 3.0), make_params(1, 1.0, -0.5))(0) == doctest::Approx(6.0));
  CHECK_THROWS_AS(dilate(0.0, ones, hp), DomainError);
  CHECK_THROWS_AS(dilate(1.0, Eigen::Vector2d(1, 1), hp), DomainError);
}

TEST_CASE("dilation group law") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> E(0.1, 10.0), Z(-5.0, 5.0);
  for (int k = 0; k < 500; ++k) {
    const double a = E(rng), b = E(rng);
    const Eigen::Vector3d z(Z(rng), Z(rng), Z(rng));
    const Eigen::VectorXd lhs = dilate(a, dilate(b, z, hp), hp);
    const Eigen::VectorXd rhs = dilate(a * b, z, hp);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  }
}

TEST_CASE("Euler field and shift") {
  const auto hp = make_params(3, 1.0, -1.0 / 6.0);
  CHECK(euler_vector(Eigen::Vector3d(1, 1, 1), hp).isApprox(Eigen::Vector3d(1, 5.0 / 6.0, 2.0 / 3.0)));
  CHECK(euler_vector(Eigen::Vector3d::Zero(), hp).isZero());
  CHECK(euler_vector(Eigen::VectorXd::Constant(1, 7.0), make_params(1, 1.0, -0.5))(0) == 7.0);
  CHECK(jordan_shift(Eigen::Vector3d(1, 2, 3)) == Eigen::Vector3d(2, 3, 0));
}

TEST_CASE("templated on scalar") {
  const auto hp = make_params<long double>(2, 1.0L, -0.25L);
  CHECK(static_cast<double>(hp.gamma_r) == doctest::Approx(0.5 / 1.25));
  Eigen::Matrix<long double, 2, 1> z(1.0L, 1.0L);
  CHECK(static_cast<double>(dilate(2.0L, z, hp)(1)) == doctest::Approx(std::pow(2.0, 0.75)));
}
