#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hulc/model.hpp"

namespace hulc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// One confidence interval per coordinate for a single method.
struct IntervalSet {
  double alpha = 0.05;
  std::string method;
  std::vector<Interval> per_coordinate;
};

/// Bucket estimates feeding HulC and the t-stat interval.
struct BucketSet {
  std::vector<Eigen::VectorXd> estimates;

  int size() const { return static_cast<int>(estimates.size()); }
};

/// Randomized HulC bucket count: B = ceil(log2(2/alpha)) when
/// u > 2^B (alpha/2) - 1, else floor(log2(2/alpha)); exact when log2(2/alpha)
/// is an integer. With this rule E[2^(1 - B*)] = alpha.
int hulc_batch_count(double alpha, double u);

/// Round-robin streaming split: zero-based index i goes to bucket i mod B.
std::vector<std::vector<std::int64_t>> round_robin_split(std::int64_t n, int buckets);

/// Per coordinate, [min, max] over bucket estimates.
IntervalSet hulc_interval(const BucketSet& buckets, double alpha);

/// The t-stat interval divides the bucket standard deviation by sqrt(B),
/// making it the standard one-sample t interval on the bucket estimates.
inline constexpr bool kTstatDivideByRootB = true;

/// Per coordinate, mean +- t_{B-1, 1-alpha/2} * s / sqrt(B) where s is the
/// sample standard deviation across buckets.
IntervalSet tstat_interval(const BucketSet& buckets, double alpha);

/// Running sums of per-step Hessians and gradient outer products, both
/// evaluated at the pre-update iterate.
class PluginAccumulator {
 public:
  explicit PluginAccumulator(int d);

  void update(ModelKind kind, const Eigen::VectorXd& theta_prev, const DataPoint& p);
  /// Adds precomputed per-step contributions.
  void add(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& grad);

  std::int64_t t() const { return t_; }
  const Eigen::MatrixXd& j_sum() const { return j_sum_; }
  const Eigen::MatrixXd& v_sum() const { return v_sum_; }

 private:
  std::int64_t t_ = 0;
  Eigen::MatrixXd j_sum_;
  Eigen::MatrixXd v_sum_;
};

PluginAccumulator plugin_update(PluginAccumulator acc, ModelKind kind, const Eigen::VectorXd& theta_prev,
                                const DataPoint& p);

/// center_k +- z_{1-alpha/2} sqrt(diag_k(J^-1 V J^-1) / t) with J = J_sum/t,
/// V = V_sum/t. nullopt when J fails to factor.
std::optional<IntervalSet> plugin_interval(const PluginAccumulator& acc, const Eigen::VectorXd& center,
                                           double alpha);

/// Offline M-estimate with its sandwich ingredients.
struct WaldFit {
  Eigen::VectorXd theta;
  Eigen::MatrixXd j;
  Eigen::MatrixXd v;
  int iterations = 0;
};

/// Exact least squares (Linear) or Newton-Raphson (Logistic) on all points.
/// nullopt when X'X or the Newton Hessian is ill-conditioned, or Newton fails
/// to reach gradient norm 1e-10 within 100 iterations.
std::optional<WaldFit> fit_offline(ModelKind kind, std::span<const DataPoint> data);

/// Wald interval theta_hat_k +- z sqrt(diag_k(J^-1 V J^-1) / T).
std::optional<IntervalSet> wald_offline(ModelKind kind, std::span<const DataPoint> data, double alpha);

/// Empirical maximum median bias: with p = share of samples <= theta_star_k,
/// returns max(0, 1/2 - min(p, 1 - p)).
double estimate_median_bias(std::span<const double> samples, double theta_star_k);

}  // namespace hulc
