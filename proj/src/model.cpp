#include "hulc/model.hpp"

#include <cmath>
#include <stdexcept>

#include "hulc/linalg.hpp"

namespace hulc {

ModelSpec ModelSpec::make(ModelKind kind, int d, CovarianceKind cov) {
  return ModelSpec{kind, d, cov, make_theta_star(d), 1.0};
}

Eigen::VectorXd make_theta_star(int d) {
  if (d < 2) throw std::domain_error("theta_star needs d >= 2");
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = static_cast<double>(k) / (d - 1);
  return v;
}

Eigen::MatrixXd covariance_matrix(CovarianceKind cov, int m) {
  if (m < 1) throw std::domain_error("covariance dimension must be >= 1");
  Eigen::MatrixXd s(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) {
        s(i, j) = 1.0;
        continue;
      }
      switch (cov) {
        case CovarianceKind::Identity: s(i, j) = 0.0; break;
        case CovarianceKind::Toeplitz: s(i, j) = std::pow(kToeplitzRho, std::abs(i - j)); break;
        case CovarianceKind::Equicorrelation: s(i, j) = kEquicorrelationRho; break;
      }
    }
  }
  return s;
}

double logistic(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double mean_function(ModelKind kind, double eta) {
  return kind == ModelKind::Linear ? eta : logistic(eta);
}

DataPoint assemble_point(const ModelSpec& spec, const Eigen::VectorXd& z, double response_draw) {
  DataPoint p;
  p.x.resize(spec.d);
  p.x(0) = 1.0;
  p.x.tail(spec.d - 1) = z;
  const double eta = spec.theta_star.dot(p.x);
  if (spec.kind == ModelKind::Linear)
    p.y = eta + spec.noise_sd * response_draw;
  else
    p.y = response_draw < logistic(eta) ? 1.0 : 0.0;
  return p;
}

DataPoint sample_point(const ModelSpec& spec, const Eigen::MatrixXd& chol, RngStream& rng) {
  const Eigen::VectorXd z = mvn_sample(chol, rng);
  const double draw = spec.kind == ModelKind::Linear ? rng.normal() : rng.uniform();
  return assemble_point(spec, z, draw);
}

double loss(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p) {
  const double eta = p.x.dot(theta);
  if (kind == ModelKind::Linear) return 0.5 * (p.y - eta) * (p.y - eta);
  // log(1 + e^eta) - y eta
  const double softplus = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
  return softplus - p.y * eta;
}

Eigen::VectorXd loss_grad(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p) {
  return (mean_function(kind, p.x.dot(theta)) - p.y) * p.x;
}

Eigen::MatrixXd loss_hessian(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p) {
  double w = 1.0;
  if (kind == ModelKind::Logistic) {
    const double s = logistic(p.x.dot(theta));
    w = s * (1.0 - s);
  }
  return w * p.x * p.x.transpose();
}

Eigen::MatrixXd population_hessian(const ModelSpec& spec) {
  if (spec.kind != ModelKind::Linear)
    throw std::invalid_argument("population Hessian has a closed form only for the linear model");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(spec.d, spec.d);
  j(0, 0) = 1.0;
  j.bottomRightCorner(spec.d - 1, spec.d - 1) = covariance_matrix(spec.cov, spec.d - 1);
  return j;
}

std::string_view to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "logistic"; }

std::string_view to_string(CovarianceKind cov) {
  switch (cov) {
    case CovarianceKind::Identity: return "identity";
    case CovarianceKind::Toeplitz: return "toeplitz";
    case CovarianceKind::Equicorrelation: return "equicorr";
  }
  return "?";
}

}  // namespace hulc
