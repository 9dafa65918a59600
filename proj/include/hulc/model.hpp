#pragma once

#include <Eigen/Dense>

#include <string_view>

#include "hulc/rng.hpp"

namespace hulc {

enum class ModelKind { Linear, Logistic };

enum class CovarianceKind { Identity, Toeplitz, Equicorrelation };

inline constexpr double kToeplitzRho = 0.5;
inline constexpr double kEquicorrelationRho = 0.2;

/// One observation. `x` carries a leading intercept entry equal to 1.
struct DataPoint {
  Eigen::VectorXd x;
  double y = 0.0;
};

/// Well-specified regression model. Covariates Z have dimension d - 1 and
/// covariance `covariance_matrix(cov, d - 1)`; x = (1, Z).
struct ModelSpec {
  ModelKind kind = ModelKind::Linear;
  int d = 2;
  CovarianceKind cov = CovarianceKind::Identity;
  Eigen::VectorXd theta_star;
  // Linear only: y = theta*'x + noise_sd * epsilon.
  double noise_sd = 1.0;

  /// Spec with theta_star = make_theta_star(d).
  static ModelSpec make(ModelKind kind, int d, CovarianceKind cov);
};

/// Coordinates linearly spaced from 0 to 1, intercept included.
Eigen::VectorXd make_theta_star(int d);

Eigen::MatrixXd covariance_matrix(CovarianceKind cov, int m);

/// Numerically stable logistic function.
double logistic(double eta);

/// Mean function psi of the GLM: identity (linear) or logistic.
double mean_function(ModelKind kind, double eta);

/// Builds a point from covariates `z` and one response draw: the noise
/// epsilon ~ N(0, 1) for Linear, a uniform u in [0, 1) for Logistic
/// (y = 1 iff u < sigma(theta*'x)).
DataPoint assemble_point(const ModelSpec& spec, const Eigen::VectorXd& z, double response_draw);

/// Draws one observation. `chol` factors covariance_matrix(spec.cov, d - 1).
/// Consumes d - 1 normals for Z, then one normal (Linear) or one uniform
/// (Logistic).
DataPoint sample_point(const ModelSpec& spec, const Eigen::MatrixXd& chol, RngStream& rng);

/// Scalar loss: 1/2 (y - x'theta)^2 or the logistic negative log-likelihood.
double loss(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p);

/// (psi(x'theta) - y) x
Eigen::VectorXd loss_grad(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p);

/// x x' (linear) or sigma (1 - sigma) x x' (logistic).
Eigen::MatrixXd loss_hessian(ModelKind kind, const Eigen::VectorXd& theta, const DataPoint& p);

/// E[X X'] = blockdiag(1, Sigma); throws std::invalid_argument for Logistic.
Eigen::MatrixXd population_hessian(const ModelSpec& spec);

std::string_view to_string(ModelKind kind);
std::string_view to_string(CovarianceKind cov);

}  // namespace hulc
