#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bfsmc/errors.hpp"
#include "bfsmc/plant.hpp"

using namespace bfsmc;
using Eigen::VectorXd;

TEST_CASE("catalog disturbances") {
  const Disturbance d = builtin_disturbance("affine_phi_sin_gamma");
  CHECK(d.phi(1.0) == doctest::Approx(15.0));
  CHECK(d.gamma(1.0) == doctest::Approx(2.52053786266843).epsilon(1e-12));
  CHECK(d.phi_tilde(2.0) == doctest::Approx(9.0));
  CHECK_FALSE(d.is_case2());

  const Disturbance c2 = builtin_disturbance("affine_phi_const_gamma");
  CHECK(c2.is_case2());
  CHECK(c2.gamma(7.0) == 2.0);
  CHECK(lipschitz_probe(c2, 0.0, 30.0) == doctest::Approx(6.0).epsilon(1e-9));
  REQUIRE(c2.oracle().psi_M);
  CHECK(*c2.oracle().psi_M == doctest::Approx(6.0));

  const Disturbance z = builtin_disturbance("zero");
  CHECK(z.phi(3.0) == 0.0);
  CHECK(z.gamma(3.0) == 1.0);
  REQUIRE(z.is_case2());
  CHECK(std::get<Case2Class>(z.declared_class()).gamma_m == 1.0);
  CHECK(lipschitz_probe(z, 0.0, 1.0) == 0.0);

  const Disturbance k = builtin_disturbance("constant", {{"phi", 2.0}, {"gamma", 4.0}});
  CHECK(k.phi(9.0) == 2.0);
  CHECK(k.gamma(9.0) == 4.0);

  CHECK_THROWS_AS(builtin_disturbance("nope"), ConfigError);
  CHECK_THROWS_AS(builtin_disturbance("zero", {{"a", 1.0}}), ConfigError);
  CHECK_THROWS_AS(builtin_disturbance("affine_phi_sin_gamma", {{"omegaa", 1.0}}), ConfigError);
}

TEST_CASE("declared class probe") {
  CHECK_NOTHROW(check_declared_class(builtin_disturbance("affine_phi_sin_gamma"), 30.0));
  CHECK_NOTHROW(check_declared_class(builtin_disturbance("affine_phi_const_gamma"), 30.0));
  // gamma crosses zero
  CHECK_THROWS_AS(check_declared_class(builtin_disturbance("affine_phi_sin_gamma", {{"c", 0.2}}), 10.0),
                  ConfigError);
}

TEST_CASE("chain right-hand side") {
  const Disturbance d = builtin_disturbance("affine_phi_sin_gamma");
  const VectorXd f = rhs(0.0, Eigen::Vector3d(1, 1, -1), 0.0, d);
  CHECK(f.isApprox(Eigen::Vector3d(1, -1, 3)));
  const Disturbance g2 = builtin_disturbance("constant", {{"phi", 0.0}, {"gamma", 2.0}});
  CHECK(rhs(0.0, VectorXd::Zero(1), 1.0, g2)(0) == 2.0);
  CHECK(rhs(0.0, Eigen::Vector2d(3, 4), 0.0, builtin_disturbance("zero")).isApprox(Eigen::Vector2d(4, 0)));

  // linear in u, only the last component depends on u
  const Eigen::Vector3d z(0.2, -1, 0.5);
  const VectorXd f0 = rhs(0.7, z, 0.0, d), f1 = rhs(0.7, z, 1.3, d), f2 = rhs(0.7, z, 2.6, d);
  CHECK((f2 - f0).isApprox(2.0 * (f1 - f0)));
  CHECK((f1 - f0).head(2).isZero());
}

TEST_CASE("tabulated disturbance") {
  const auto path = std::filesystem::temp_directory_path() / "bfsmc_table_test.csv";
  {
    std::ofstream out(path);
    out << "t,phi,gamma\n0,1,2\n1,3,2\n2,2,2\n";
  }
  const Disturbance d = load_tabulated_disturbance(path.string());
  CHECK(d.phi(0.5) == doctest::Approx(2.0));
  CHECK(d.phi(5.0) == doctest::Approx(2.0));
  CHECK(d.phi(-1.0) == doctest::Approx(1.0));
  CHECK(d.is_case2());
  CHECK(lipschitz_probe(d, 0.0, 2.0, 2000) == doctest::Approx(1.0).epsilon(1e-6));

  const Disturbance v = tabulated_disturbance({0, 1, 2}, {1, -4, 2}, {1, 2, 3});
  CHECK_FALSE(v.is_case2());
  CHECK(v.phi_tilde(1.5) == doctest::Approx(4.0));
  CHECK_THROWS_AS(tabulated_disturbance({0, 0, 1}, {1, 1, 1}, {1, 1, 1}), ConfigError);
  CHECK_THROWS_AS(load_tabulated_disturbance("/nonexistent/table.csv"), ConfigError);
  std::filesystem::remove(path);
}
