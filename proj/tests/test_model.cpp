#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "hulc/linalg.hpp"
#include "hulc/model.hpp"

using namespace hulc;

namespace {

DataPoint random_point(ModelKind kind, int d, RngStream& rng) {
  DataPoint p;
  p.x.resize(d);
  p.x(0) = 1.0;
  for (int i = 1; i < d; ++i) p.x(i) = rng.normal();
  p.y = kind == ModelKind::Linear ? 3.0 * rng.normal() : (rng.uniform() < 0.5 ? 0.0 : 1.0);
  return p;
}

Eigen::VectorXd random_vector(int d, RngStream& rng, double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("make_theta_star") {
  Eigen::VectorXd e5(5);
  e5 << 0, 0.25, 0.5, 0.75, 1;
  CHECK(make_theta_star(5) == e5);
  CHECK(make_theta_star(2) == Eigen::Vector2d(0, 1));
  CHECK(make_theta_star(3) == Eigen::Vector3d(0, 0.5, 1));
  CHECK_THROWS_AS(make_theta_star(1), std::domain_error);
}

TEST_CASE("covariance_matrix") {
  Eigen::Matrix3d toeplitz;
  toeplitz << 1, 0.5, 0.25, 0.5, 1, 0.5, 0.25, 0.5, 1;
  CHECK(covariance_matrix(CovarianceKind::Toeplitz, 3) == Eigen::MatrixXd(toeplitz));
  Eigen::Matrix2d equi;
  equi << 1, 0.2, 0.2, 1;
  CHECK(covariance_matrix(CovarianceKind::Equicorrelation, 2) == Eigen::MatrixXd(equi));
  CHECK(covariance_matrix(CovarianceKind::Identity, 1) == Eigen::MatrixXd::Identity(1, 1));
  CHECK_THROWS_AS(covariance_matrix(CovarianceKind::Identity, 0), std::domain_error);
}

TEST_CASE("sample_point") {
  SUBCASE("deterministic branch") {
    const auto spec = ModelSpec::make(ModelKind::Linear, 5, CovarianceKind::Identity);
    const DataPoint p = assemble_point(spec, Eigen::VectorXd::Zero(4), 0.0);
    CHECK(p.x(0) == 1.0);
    CHECK(p.y == 0.0);
  }
  SUBCASE("logistic with zero parameter is a fair coin") {
    auto spec = ModelSpec::make(ModelKind::Logistic, 3, CovarianceKind::Identity);
    spec.theta_star.setZero();
    const auto chol = spd_factorize(covariance_matrix(spec.cov, 2));
    RngStream rng(3, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
      const DataPoint p = sample_point(spec, *chol, rng);
      CHECK((p.y == 0.0 || p.y == 1.0));
      sum += p.y;
    }
    CHECK(std::abs(sum / 100000 - 0.5) < 0.01);
  }
  SUBCASE("linear response variance") {
    const auto spec = ModelSpec::make(ModelKind::Linear, 5, CovarianceKind::Identity);
    const auto chol = spd_factorize(covariance_matrix(spec.cov, 4));
    RngStream rng(4, 0);
    double s = 0.0, s2 = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const DataPoint p = sample_point(spec, *chol, rng);
      CHECK(p.x(0) == 1.0);
      s += p.y;
      s2 += p.y * p.y;
    }
    const double var = s2 / n - (s / n) * (s / n);
    CHECK(std::abs(var / 2.875 - 1.0) < 0.03);
  }
  SUBCASE("cloned streams give identical points") {
    const auto spec = ModelSpec::make(ModelKind::Logistic, 4, CovarianceKind::Toeplitz);
    const auto chol = spd_factorize(covariance_matrix(spec.cov, 3));
    RngStream a(8, 8);
    RngStream b = a;
    for (int i = 0; i < 10; ++i) {
      const DataPoint p = sample_point(spec, *chol, a);
      const DataPoint q = sample_point(spec, *chol, b);
      CHECK(p.x == q.x);
      CHECK(p.y == q.y);
    }
  }
}

TEST_CASE("loss_grad examples") {
  DataPoint p{Eigen::Vector2d(1, 2), 0.0};
  const Eigen::VectorXd theta = Eigen::Vector2d(0.5, -0.25);
  p.y = p.x.dot(theta);
  CHECK(loss_grad(ModelKind::Linear, theta, p).isZero(0.0));

  const DataPoint q{Eigen::Vector2d(1, 2), 1.0};
  const Eigen::VectorXd g = loss_grad(ModelKind::Logistic, Eigen::Vector2d::Zero(), q);
  CHECK(g(0) == doctest::Approx(-0.5));
  CHECK(g(1) == doctest::Approx(-1.0));
}

TEST_CASE("loss_grad matches finite differences of the loss") {
  RngStream rng(77, 0);
  const double h = 1e-6;
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Logistic}) {
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 2 + trial % 6;
      const Eigen::VectorXd theta = random_vector(d, rng);
      const DataPoint p = random_point(kind, d, rng);
      const Eigen::VectorXd g = loss_grad(kind, theta, p);
      Eigen::VectorXd fd(d);
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd up = theta, dn = theta;
        up(i) += h;
        dn(i) -= h;
        fd(i) = (loss(kind, up, p) - loss(kind, dn, p)) / (2 * h);
      }
      CHECK((fd - g).norm() / std::max(1.0, g.norm()) < 1e-6);
    }
  }
}

TEST_CASE("loss_hessian examples and finite differences") {
  const DataPoint p{Eigen::Vector2d(1, 2), 0.3};
  Eigen::Matrix2d outer;
  outer << 1, 2, 2, 4;
  CHECK(loss_hessian(ModelKind::Linear, Eigen::Vector2d(3, 4), p) == Eigen::MatrixXd(outer));

  const DataPoint q{Eigen::Vector2d(1, 0), 1.0};
  Eigen::Matrix2d quarter;
  quarter << 0.25, 0, 0, 0;
  CHECK(loss_hessian(ModelKind::Logistic, Eigen::Vector2d::Zero(), q).isApprox(Eigen::MatrixXd(quarter)));

  RngStream rng(78, 0);
  const double h = 1e-6;
  for (ModelKind kind : {ModelKind::Linear, ModelKind::Logistic}) {
    for (int trial = 0; trial < 100; ++trial) {
      const int d = 2 + trial % 6;
      const Eigen::VectorXd theta = random_vector(d, rng);
      const DataPoint pt = random_point(kind, d, rng);
      const Eigen::MatrixXd hess = loss_hessian(kind, theta, pt);
      CHECK(hess.isApprox(hess.transpose()));
      Eigen::MatrixXd fd(d, d);
      for (int i = 0; i < d; ++i) {
        Eigen::VectorXd up = theta, dn = theta;
        up(i) += h;
        dn(i) -= h;
        fd.col(i) = (loss_grad(kind, up, pt) - loss_grad(kind, dn, pt)) / (2 * h);
      }
      CHECK((fd - hess).norm() / std::max(1.0, hess.norm()) < 1e-5);
    }
  }
}

TEST_CASE("logistic gradient norm is bounded by the covariate norm") {
  RngStream rng(79, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::VectorXd theta = random_vector(4, rng, 10.0);
    const DataPoint p = random_point(ModelKind::Logistic, 4, rng);
    CHECK(loss_grad(ModelKind::Logistic, theta, p).norm() <= p.x.norm());
  }
}

TEST_CASE("logistic function is stable for large arguments") {
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  CHECK(std::isfinite(loss(ModelKind::Logistic, Eigen::Vector2d(900, 0), DataPoint{Eigen::Vector2d(1, 0), 0.0})));
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(-2.0) == doctest::Approx(1.0 - logistic(2.0)).epsilon(1e-15));
}

TEST_CASE("population_hessian") {
  CHECK(population_hessian(ModelSpec::make(ModelKind::Linear, 2, CovarianceKind::Identity)) ==
        Eigen::MatrixXd::Identity(2, 2));
  Eigen::Matrix3d expected;
  expected << 1, 0, 0, 0, 1, 0.5, 0, 0.5, 1;
  const auto spec = ModelSpec::make(ModelKind::Linear, 3, CovarianceKind::Toeplitz);
  CHECK(population_hessian(spec) == Eigen::MatrixXd(expected));
  CHECK_THROWS_AS(population_hessian(ModelSpec::make(ModelKind::Logistic, 3, CovarianceKind::Toeplitz)),
                  std::invalid_argument);

  const auto chol = spd_factorize(covariance_matrix(spec.cov, 2));
  RngStream rng(80, 0);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += loss_hessian(ModelKind::Linear, spec.theta_star, sample_point(spec, *chol, rng));
  CHECK((acc / n - expected).cwiseAbs().maxCoeff() < 0.02);
}
