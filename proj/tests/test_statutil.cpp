#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <set>
#include <stdexcept>

#include "hulc/linalg.hpp"
#include "hulc/quantile.hpp"
#include "hulc/rng.hpp"
#include "oracles.hpp"

using namespace hulc;

TEST_CASE("normal_quantile examples") {
  CHECK(normal_quantile(0.5) == 0.0);

  const double oracle = oracle::invert_upper([](long double z) { return oracle::normal_cdf(z); }, 0.975);
  CHECK(std::abs(oracle - 1.959964) < 1e-6);
  CHECK(std::abs(normal_quantile(0.975) - oracle) < 1e-9);

  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) < 1e-9);
  }
}

TEST_CASE("normal_quantile rejects probabilities outside (0, 1)") {
  CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(-0.2), std::domain_error);
  CHECK_THROWS_AS(normal_quantile(std::nan("")), std::domain_error);
}

TEST_CASE("student_t_quantile examples") {
  CHECK(student_t_quantile(1, 0.75) == doctest::Approx(1.0).epsilon(1e-12));

  const double oracle5 = oracle::invert_upper([](long double q) { return oracle::t_cdf(q, 5); }, 0.975);
  CHECK(std::abs(oracle5 - 2.570582) < 1e-6);
  CHECK(std::abs(student_t_quantile(5, 0.975) - oracle5) < 1e-8);

  const double oracle4 = oracle::invert_upper([](long double q) { return oracle::t_cdf(q, 4); }, 0.975);
  CHECK(std::abs(student_t_quantile(4, 0.975) - oracle4) < 1e-8);

  CHECK(std::abs(student_t_quantile(1000000, 0.975) - normal_quantile(0.975)) < 1e-3);
}

TEST_CASE("student_t_quantile inverts the t distribution function") {
  for (int df : {1, 2, 3, 4, 5, 10, 30, 200}) {
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      CHECK(std::abs(student_t_cdf(student_t_quantile(df, p), df) - p) < 1e-8);
    }
  }
  // Cauchy tail beyond the initial bracket.
  CHECK(student_t_quantile(1, 1e-4) == doctest::Approx(std::tan(3.14159265358979323846 * (1e-4 - 0.5))).epsilon(1e-9));
}

TEST_CASE("student_t_quantile rejects bad arguments") {
  CHECK_THROWS_AS(student_t_quantile(0, 0.5), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(3, 1.0), std::domain_error);
  CHECK_THROWS_AS(student_t_quantile(3, 0.0), std::domain_error);
}

TEST_CASE("quantile functions are strictly increasing in p") {
  double prev_z = -INFINITY, prev_t = -INFINITY;
  for (int i = 1; i <= 99; ++i) {
    const double p = i / 100.0;
    const double z = normal_quantile(p);
    const double t = student_t_quantile(4, p);
    CHECK(z > prev_z);
    CHECK(t > prev_t);
    prev_z = z;
    prev_t = t;
  }
}

TEST_CASE("incomplete beta spot values") {
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(incomplete_beta(2.5, 1.0, 0.7) == doctest::Approx(std::pow(0.7, 2.5)).epsilon(1e-13));
  CHECK(incomplete_beta(0.5, 5.0, 0.2) == doctest::Approx(0.855072).epsilon(1e-6));
}

TEST_CASE("spd_factorize examples") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  const auto l_id = spd_factorize(id);
  REQUIRE(l_id);
  CHECK(l_id->isApprox(id, 1e-15));

  Eigen::MatrixXd m(2, 2);
  m << 4, 2, 2, 5;
  const auto l = spd_factorize(m);
  REQUIRE(l);
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 0, 1, 2;
  CHECK((*l - expected).norm() < 1e-14);
  CHECK((*l * l->transpose() - m).norm() / m.norm() < 1e-10);

  Eigen::MatrixXd singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_FALSE(spd_factorize(singular).has_value());

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_FALSE(spd_factorize(indefinite).has_value());
}

TEST_CASE("spd_factorize reconstructs random SPD matrices") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 12;
    Eigen::MatrixXd b(n + 2, n);
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < n; ++j) b(i, j) = rng.normal();
    const Eigen::MatrixXd a = b.transpose() * b + 1e-3 * Eigen::MatrixXd::Identity(n, n);
    const auto l = spd_factorize(a);
    REQUIRE(l);
    CHECK(l->isLowerTriangular());
    CHECK((*l * l->transpose() - a).norm() / a.norm() < 1e-8);
  }
}

TEST_CASE("sandwich_diagonal matches explicit inverses") {
  RngStream rng(5, 1);
  Eigen::MatrixXd b(8, 4), c(8, 4);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 4; ++j) {
      b(i, j) = rng.normal();
      c(i, j) = rng.normal();
    }
  const Eigen::MatrixXd j = b.transpose() * b;
  const Eigen::MatrixXd v = c.transpose() * c;
  const Eigen::MatrixXd ji = j.inverse();
  const Eigen::VectorXd expected = (ji * v * ji).diagonal();
  const auto diag = sandwich_diagonal(j, v);
  REQUIRE(diag);
  CHECK((*diag - expected).norm() / expected.norm() < 1e-10);
}

TEST_CASE("mvn_sample") {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  CHECK(mvn_sample(id, Eigen::VectorXd::Zero(4)).isZero(0.0));

  Eigen::MatrixXd chol(1, 1);
  chol << 2.0;
  Eigen::VectorXd g(1);
  g << 1.5;
  CHECK(mvn_sample(chol, g)(0) == 3.0);

  Eigen::MatrixXd sigma(3, 3);
  sigma << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
  const auto l = spd_factorize(sigma);
  REQUIRE(l);
  RngStream rng(2024, 7);
  const int n = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mvn_sample(*l, rng);
    acc += x * x.transpose();
    mean += x;
  }
  mean /= n;
  const Eigen::MatrixXd cov = acc / n - mean * mean.transpose();
  CHECK((cov - sigma).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("RngStream determinism and stream separation") {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  int same_position = 0;
  bool all_equal = true;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    const auto y = c.next_u64();
    if (x == y) ++same_position;
    all_equal = all_equal && x == y;
  }
  CHECK_FALSE(all_equal);
  CHECK(same_position == 0);

  // Children depend on the parent key and the id only.
  RngStream p1(9, 1), p2(9, 1);
  p1.next_u64();
  CHECK(p1.child(5).next_u64() == p2.child(5).next_u64());
  CHECK(p1.child(5).next_u64() != p1.child(6).next_u64());
}

TEST_CASE("RngStream distributions") {
  RngStream rng(1, 1);
  double sum = 0.0, sum2 = 0.0, usum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    usum += u;
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(usum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(rng.position() == 3 * static_cast<std::uint64_t>(n));
}
