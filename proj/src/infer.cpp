#include "hulc/infer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hulc/linalg.hpp"
#include "hulc/quantile.hpp"

namespace hulc {
namespace {

constexpr double kNewtonTolerance = 1e-10;
constexpr double kNewtonStepTolerance = 1e-6;
constexpr int kNewtonMaxIter = 100;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
}

void check_buckets(const BucketSet& b) {
  if (b.size() < 2) throw std::domain_error("interval needs at least two buckets");
  const auto d = b.estimates.front().size();
  for (const auto& e : b.estimates)
    if (e.size() != d) throw std::domain_error("bucket estimates differ in length");
}

IntervalSet sandwich_interval(const Eigen::VectorXd& center, const Eigen::VectorXd& var_diag, double n,
                              double alpha, std::string method) {
  const double z = normal_quantile(1.0 - alpha / 2.0);
  IntervalSet out{alpha, std::move(method), {}};
  out.per_coordinate.reserve(center.size());
  for (Eigen::Index k = 0; k < center.size(); ++k) {
    const double half = z * std::sqrt(std::max(0.0, var_diag(k)) / n);
    out.per_coordinate.push_back({center(k) - half, center(k) + half});
  }
  return out;
}

}  // namespace

int hulc_batch_count(double alpha, double u) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha must lie in (0, 1]");
  const double l = std::log2(2.0 / alpha);
  const double upper = std::ceil(l);
  if (upper == std::floor(l)) return static_cast<int>(upper);
  if (u > std::exp2(upper) * (alpha / 2.0) - 1.0) return static_cast<int>(upper);
  return static_cast<int>(std::floor(l));
}

std::vector<std::vector<std::int64_t>> round_robin_split(std::int64_t n, int buckets) {
  if (buckets < 1 || buckets > n) throw std::domain_error("round_robin_split needs 1 <= B <= T");
  std::vector<std::vector<std::int64_t>> out(buckets);
  for (auto& b : out) b.reserve(n / buckets + 1);
  for (std::int64_t i = 0; i < n; ++i) out[i % buckets].push_back(i);
  return out;
}

IntervalSet hulc_interval(const BucketSet& buckets, double alpha) {
  check_buckets(buckets);
  const auto d = buckets.estimates.front().size();
  IntervalSet out{alpha, "hulc", {}};
  out.per_coordinate.reserve(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double lo = buckets.estimates.front()(k);
    double hi = lo;
    for (const auto& e : buckets.estimates) {
      if (std::isnan(e(k))) {
        lo = hi = e(k);
        break;
      }
      lo = std::min(lo, e(k));
      hi = std::max(hi, e(k));
    }
    out.per_coordinate.push_back({lo, hi});
  }
  return out;
}

IntervalSet tstat_interval(const BucketSet& buckets, double alpha) {
  check_buckets(buckets);
  check_alpha(alpha);
  const int b = buckets.size();
  const auto d = buckets.estimates.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& e : buckets.estimates) mean += e;
  mean /= b;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(d);
  for (const auto& e : buckets.estimates) ss += (e - mean).cwiseAbs2();
  const double q = student_t_quantile(b - 1, 1.0 - alpha / 2.0);
  const double scale = kTstatDivideByRootB ? 1.0 / std::sqrt(static_cast<double>(b)) : 1.0;

  IntervalSet out{alpha, "tstat", {}};
  out.per_coordinate.reserve(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double half = q * std::sqrt(ss(k) / (b - 1)) * scale;
    out.per_coordinate.push_back({mean(k) - half, mean(k) + half});
  }
  return out;
}

PluginAccumulator::PluginAccumulator(int d)
    : j_sum_(Eigen::MatrixXd::Zero(d, d)), v_sum_(Eigen::MatrixXd::Zero(d, d)) {}

void PluginAccumulator::update(ModelKind kind, const Eigen::VectorXd& theta_prev, const DataPoint& p) {
  add(loss_hessian(kind, theta_prev, p), loss_grad(kind, theta_prev, p));
}

void PluginAccumulator::add(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad) {
  j_sum_ += hessian;
  v_sum_.selfadjointView<Eigen::Lower>().rankUpdate(grad);
  v_sum_.triangularView<Eigen::StrictlyUpper>() = v_sum_.transpose();
  ++t_;
}

PluginAccumulator plugin_update(PluginAccumulator acc, ModelKind kind, const Eigen::VectorXd& theta_prev,
                                const DataPoint& p) {
  acc.update(kind, theta_prev, p);
  return acc;
}

std::optional<IntervalSet> plugin_interval(const PluginAccumulator& acc, const Eigen::VectorXd& center,
                                           double alpha) {
  check_alpha(alpha);
  if (acc.t() < 1) throw std::domain_error("plug-in interval needs at least one update");
  const double n = static_cast<double>(acc.t());
  const auto diag = sandwich_diagonal(acc.j_sum() / n, acc.v_sum() / n);
  if (!diag) return std::nullopt;
  return sandwich_interval(center, *diag, n, alpha, "plugin");
}

std::optional<WaldFit> fit_offline(ModelKind kind, std::span<const DataPoint> data) {
  if (data.empty()) throw std::domain_error("offline fit needs data");
  const Eigen::Index d = data.front().x.size();
  if (static_cast<Eigen::Index>(data.size()) < d) throw std::domain_error("offline fit needs T >= d");
  const double n = static_cast<double>(data.size());

  WaldFit fit;
  if (kind == ModelKind::Linear) {
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(d);
    for (const auto& p : data) {
      xtx.selfadjointView<Eigen::Lower>().rankUpdate(p.x);
      xty += p.y * p.x;
    }
    const auto l = spd_factorize(xtx);
    if (!l) return std::nullopt;
    fit.theta = spd_solve(*l, xty);
  } else {
    fit.theta = Eigen::VectorXd::Zero(d);
    bool converged = false;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
      for (const auto& p : data) {
        const double s = logistic(p.x.dot(fit.theta));
        grad += (s - p.y) * p.x;
        hess.selfadjointView<Eigen::Lower>().rankUpdate(p.x, s * (1.0 - s));
      }
      grad /= n;
      hess /= n;
      if (!grad.allFinite()) return std::nullopt;
      const auto l = spd_factorize(hess);
      if (!l) return std::nullopt;
      const Eigen::VectorXd step = spd_solve(*l, grad);
      fit.theta -= step;
      fit.iterations = it + 1;
      // Under separation the gradient vanishes while the steps stay O(1).
      if (grad.norm() <= kNewtonTolerance && step.norm() <= kNewtonStepTolerance * (1.0 + fit.theta.norm())) {
        converged = true;
        break;
      }
    }
    if (!converged) return std::nullopt;
  }

  fit.j = Eigen::MatrixXd::Zero(d, d);
  fit.v = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : data) {
    fit.j += loss_hessian(kind, fit.theta, p);
    fit.v.selfadjointView<Eigen::Lower>().rankUpdate(loss_grad(kind, fit.theta, p));
  }
  fit.v.triangularView<Eigen::StrictlyUpper>() = fit.v.transpose();
  fit.j /= n;
  fit.v /= n;
  return fit;
}

std::optional<IntervalSet> wald_offline(ModelKind kind, std::span<const DataPoint> data, double alpha) {
  check_alpha(alpha);
  const auto fit = fit_offline(kind, data);
  if (!fit) return std::nullopt;
  const auto diag = sandwich_diagonal(fit->j, fit->v);
  if (!diag) return std::nullopt;
  return sandwich_interval(fit->theta, *diag, static_cast<double>(data.size()), alpha, "wald");
}

double estimate_median_bias(std::span<const double> samples, double theta_star_k) {
  if (samples.empty()) throw std::domain_error("median bias needs samples");
  const auto below = std::count_if(samples.begin(), samples.end(), [&](double s) { return s <= theta_star_k; });
  const double p = static_cast<double>(below) / static_cast<double>(samples.size());
  return std::max(0.0, 0.5 - std::min(p, 1.0 - p));
}

}  // namespace hulc
