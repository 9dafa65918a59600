#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <ranges>
#include <string_view>

#include "hulc/model.hpp"
#include "hulc/rng.hpp"

namespace hulc {

/// Step-size rule eta_t: constant, or c * t^(-gamma).
struct StepSchedule {
  enum class Kind { Constant, Polynomial };

  Kind kind = Kind::Polynomial;
  double c = 0.5;
  double gamma = 0.505;

  static StepSchedule constant(double eta);
  static StepSchedule polynomial(double c, double gamma = 0.505);
};

double step_size(const StepSchedule& s, std::int64_t t);

enum class Algorithm {
  Sgd,
  AveragedSgd,
  ImplicitLast,
  ImplicitAverage,
  RootSgd,
  TruncatedSgd,
  NoisyTruncatedSgd,
};

inline constexpr double kDefaultTruncationEps2 = 0.64;  // eps = 0.8
inline constexpr double kDefaultNoiseSigma = 1.0;
inline constexpr double kDefaultNoiseBeta = 0.25;

struct AlgorithmKind {
  Algorithm tag = Algorithm::AveragedSgd;
  double eps2 = kDefaultTruncationEps2;
  double sigma = kDefaultNoiseSigma;
  double beta = kDefaultNoiseBeta;
  // ROOT-SGD only: when false the (t-1)/t correction weight is forced to zero.
  bool root_recursion = true;

  /// Throws std::domain_error on out-of-range hyperparameters.
  void validate() const;

  /// True for the average-iterate outputs (AveragedSgd, ImplicitAverage).
  bool returns_average() const;
};

std::string_view to_string(Algorithm a);

/// Constant step used for the burn-in pass that produces theta^(0).
inline constexpr double kWarmStartStep = 0.001;

struct TruncatedGradient {
  double kappa = 0.0;
  Eigen::VectorXd g;
};

/// Keeps the largest-magnitude coordinates carrying a (1 - eps2) share of
/// ||g||^2 and zeroes every coordinate with |g_i| < kappa.
///
/// kappa is the first sorted magnitude |g_(i)| at which the running sum of
/// the larger squares g_(1)^2 + ... + g_(i-1)^2 reaches (1 - eps2) ||g||^2.
/// If the scan never reaches it, kappa = |g_(d)| and nothing is zeroed.
TruncatedGradient gradient_truncate(const Eigen::VectorXd& g, double eps2);

/// Implicit update theta = theta_prev - eta * grad(Z; theta), solved exactly.
/// For GLM losses the solution is theta_prev - s x, with the scalar s the
/// root of s = eta (psi(x'theta_prev - s ||x||^2) - y), found by bisection.
/// Throws std::runtime_error if the bisection fails to converge.
Eigen::VectorXd implicit_step(ModelKind kind, const Eigen::VectorXd& theta_prev, const DataPoint& p,
                              double eta);

/// Online state of one stochastic-approximation run.
class OptimizerState {
 public:
  /// `noise` is used only by NoisyTruncatedSgd.
  OptimizerState(AlgorithmKind kind, Eigen::VectorXd theta0, RngStream noise = RngStream(0, 0));

  /// Processes one observation with eta = step_size(sched, t + 1).
  void step(const StepSchedule& sched, ModelKind model, const DataPoint& p);

  const AlgorithmKind& kind() const { return kind_; }
  std::int64_t t() const { return t_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  /// Mean of theta^(1..t); theta^(0) while t == 0.
  const Eigen::VectorXd& average() const { return avg_; }
  /// The algorithm's output: average() or theta() depending on the kind.
  const Eigen::VectorXd& estimate() const;

 private:
  AlgorithmKind kind_;
  std::int64_t t_ = 0;
  Eigen::VectorXd theta_;
  Eigen::VectorXd avg_;
  Eigen::VectorXd prev_theta_;  // ROOT-SGD: theta^(t-1) before the step
  Eigen::VectorXd v_;           // ROOT-SGD recursive gradient
  RngStream noise_;
};

OptimizerState advance(OptimizerState state, const StepSchedule& sched, ModelKind model, const DataPoint& p);

/// Plain SGD with step kWarmStartStep from the zero vector over `points`.
template <std::ranges::input_range R>
Eigen::VectorXd warm_start(ModelKind kind, int d, R&& points) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  for (const DataPoint& p : points) theta -= kWarmStartStep * loss_grad(kind, theta, p);
  return theta;
}

template <std::ranges::input_range R>
Eigen::VectorXd run_stream(const AlgorithmKind& kind, const StepSchedule& sched, ModelKind model,
                           Eigen::VectorXd theta0, R&& stream, RngStream noise = RngStream(0, 0)) {
  OptimizerState state(kind, std::move(theta0), noise);
  for (const DataPoint& p : stream) state.step(sched, model, p);
  return state.estimate();
}

}  // namespace hulc
