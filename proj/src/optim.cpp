#include "hulc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hulc {

StepSchedule StepSchedule::constant(double eta) {
  if (!(eta > 0.0)) throw std::domain_error("constant step must be positive");
  return {Kind::Constant, eta, 0.0};
}

StepSchedule StepSchedule::polynomial(double c, double gamma) {
  if (!(c > 0.0)) throw std::domain_error("step constant c must be positive");
  if (!(gamma > 0.5 && gamma < 1.0)) throw std::domain_error("step exponent gamma must lie in (0.5, 1)");
  return {Kind::Polynomial, c, gamma};
}

double step_size(const StepSchedule& s, std::int64_t t) {
  if (t < 1) throw std::domain_error("step index must be >= 1");
  if (s.kind == StepSchedule::Kind::Constant) return s.c;
  return s.c * std::pow(static_cast<double>(t), -s.gamma);
}

void AlgorithmKind::validate() const {
  if (tag == Algorithm::TruncatedSgd || tag == Algorithm::NoisyTruncatedSgd) {
    if (!(eps2 > 0.0 && eps2 <= 1.0)) throw std::domain_error("truncation eps^2 must lie in (0, 1]");
  }
  if (tag == Algorithm::NoisyTruncatedSgd) {
    if (!(sigma > 0.0)) throw std::domain_error("noise sigma must be positive");
    if (!(beta >= 0.0 && beta <= 0.5)) throw std::domain_error("noise beta must lie in [0, 0.5]");
  }
}

bool AlgorithmKind::returns_average() const {
  return tag == Algorithm::AveragedSgd || tag == Algorithm::ImplicitAverage;
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Sgd: return "sgd";
    case Algorithm::AveragedSgd: return "asgd";
    case Algorithm::ImplicitLast: return "implicit-last";
    case Algorithm::ImplicitAverage: return "implicit-avg";
    case Algorithm::RootSgd: return "root";
    case Algorithm::TruncatedSgd: return "truncated";
    case Algorithm::NoisyTruncatedSgd: return "noisy-truncated";
  }
  return "?";
}

TruncatedGradient gradient_truncate(const Eigen::VectorXd& g, double eps2) {
  if (g.size() == 0) throw std::domain_error("gradient_truncate needs a non-empty gradient");
  std::vector<double> mags(g.data(), g.data() + g.size());
  for (double& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  const double threshold = (1.0 - eps2) * g.squaredNorm();
  double kappa = mags.back();
  double cumsum = 0.0;
  for (double m : mags) {
    if (cumsum >= threshold) {
      kappa = m;
      break;
    }
    cumsum += m * m;
  }

  TruncatedGradient out{kappa, g};
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g(i)) < kappa) out.g(i) = 0.0;
  }
  return out;
}

Eigen::VectorXd implicit_step(ModelKind kind, const Eigen::VectorXd& theta_prev, const DataPoint& p,
                              double eta) {
  constexpr int kMaxBisections = 200;
  const double a = p.x.dot(theta_prev);
  const double q = p.x.squaredNorm();
  const double r0 = eta * (mean_function(kind, a) - p.y);
  if (!std::isfinite(r0)) throw std::runtime_error("implicit step: non-finite gradient");
  if (r0 == 0.0) return theta_prev;

  // f is increasing in s, f(0) = -r0 and f(r0) has the sign of r0.
  auto f = [&](double s) { return s - eta * (mean_function(kind, a - s * q) - p.y); };
  double lo = std::min(0.0, r0);
  double hi = std::max(0.0, r0);
  bool converged = false;
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) {
      converged = true;
      break;
    }
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      converged = true;
      break;
    }
    if (fm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (!converged) throw std::runtime_error("implicit step: bisection did not converge");
  const double s = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  return theta_prev - s * p.x;
}

OptimizerState::OptimizerState(AlgorithmKind kind, Eigen::VectorXd theta0, RngStream noise)
    : kind_(kind), theta_(std::move(theta0)), noise_(noise) {
  kind_.validate();
  avg_ = theta_;
  if (kind_.tag == Algorithm::RootSgd) {
    prev_theta_ = theta_;
    v_ = Eigen::VectorXd::Zero(theta_.size());
  }
}

void OptimizerState::step(const StepSchedule& sched, ModelKind model, const DataPoint& p) {
  const std::int64_t t = t_ + 1;
  const double eta = step_size(sched, t);
  switch (kind_.tag) {
    case Algorithm::Sgd:
    case Algorithm::AveragedSgd:
      theta_ -= eta * loss_grad(model, theta_, p);
      break;
    case Algorithm::ImplicitLast:
    case Algorithm::ImplicitAverage:
      theta_ = implicit_step(model, theta_, p, eta);
      break;
    case Algorithm::RootSgd: {
      Eigen::VectorXd v = loss_grad(model, theta_, p);
      if (t > 1 && kind_.root_recursion) {
        const double w = static_cast<double>(t - 1) / static_cast<double>(t);
        v += w * (v_ - loss_grad(model, prev_theta_, p));
      }
      v_ = std::move(v);
      prev_theta_ = theta_;
      theta_ -= eta * v_;
      break;
    }
    case Algorithm::TruncatedSgd:
      theta_ -= eta * gradient_truncate(loss_grad(model, theta_, p), kind_.eps2).g;
      break;
    case Algorithm::NoisyTruncatedSgd: {
      theta_ -= eta * gradient_truncate(loss_grad(model, theta_, p), kind_.eps2).g;
      const double scale = std::pow(eta, 0.5 + kind_.beta) * kind_.sigma;
      for (Eigen::Index i = 0; i < theta_.size(); ++i) theta_(i) += scale * noise_.normal();
      break;
    }
  }
  t_ = t;
  const double inv_t = 1.0 / static_cast<double>(t);
  avg_ = (1.0 - inv_t) * avg_ + inv_t * theta_;
}

const Eigen::VectorXd& OptimizerState::estimate() const {
  return kind_.returns_average() ? avg_ : theta_;
}

OptimizerState advance(OptimizerState state, const StepSchedule& sched, ModelKind model, const DataPoint& p) {
  state.step(sched, model, p);
  return state;
}

}  // namespace hulc
