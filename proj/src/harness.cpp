#include "hulc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <exception>
#include <ranges>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "hulc/infer.hpp"
#include "hulc/linalg.hpp"

namespace hulc {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Points j, j + B, j + 2B, ... of `data` as a range of const DataPoint&.
auto bucket_view(std::span<const DataPoint> data, std::int64_t j, int buckets) {
  const std::int64_t n = data.size();
  const std::int64_t m = j < n ? (n - j + buckets - 1) / buckets : 0;
  return std::views::iota(std::int64_t{0}, m) |
         std::views::transform([data, j, buckets](std::int64_t i) -> const DataPoint& {
           return data[j + i * buckets];
         });
}

template <typename R>
Eigen::VectorXd initial_value(const ExperimentConfig& cfg, R&& points) {
  if (cfg.theta0) return *cfg.theta0;
  if (!cfg.warm_start) return Eigen::VectorXd::Zero(cfg.d);
  const auto m = static_cast<std::int64_t>(std::ranges::distance(points));
  return warm_start(cfg.model, cfg.d, points | std::views::take(m / 3));
}

void emit(std::vector<ResultRow>& out, const ResultRow& proto, Method method, const IntervalSet& set,
          const Eigen::VectorXd& theta_star, bool use_center_of_interval) {
  for (std::size_t k = 0; k < set.per_coordinate.size(); ++k) {
    const Interval& iv = set.per_coordinate[k];
    ResultRow r = proto;
    r.method = method;
    r.k = static_cast<int>(k) + 1;
    r.covered = iv.contains(theta_star(k));
    r.width = iv.width();
    r.center = use_center_of_interval ? iv.center() : kNaN;
    out.push_back(r);
  }
}

void emit_unavailable(std::vector<ResultRow>& out, const ResultRow& proto, Method method, int d,
                      const Eigen::VectorXd* centers) {
  for (int k = 0; k < d; ++k) {
    ResultRow r = proto;
    r.method = method;
    r.k = k + 1;
    r.covered = false;
    r.width = kNaN;
    r.center = centers ? (*centers)(k) : kNaN;
    r.unavailable = true;
    out.push_back(r);
  }
}

auto row_order_key(const ResultRow& r) { return std::make_tuple(r.t, r.c_index, r.rep, r.method, r.k); }

bool nan_last_less(double a, double b) {
  if (std::isnan(a)) return false;
  if (std::isnan(b)) return true;
  return a < b;
}

std::vector<ResultRow> replicate(const ExperimentConfig& cfg, std::int64_t t, std::span<const double> cs,
                                 std::span<const int> c_indices, int rep) {
  const ModelSpec spec = cfg.model_spec();
  const RngStream rep_rng = replication_stream(cfg.base_seed, rep);
  const std::vector<DataPoint> data = generate_dataset(spec, t, rep_rng.child(static_cast<std::uint64_t>(StreamRole::Data)));
  const RngStream noise_root = rep_rng.child(static_cast<std::uint64_t>(StreamRole::Noise));

  ResultRow proto;
  proto.model = cfg.model;
  proto.d = cfg.d;
  proto.t = t;
  proto.cov = cfg.cov;
  proto.algo = cfg.algorithm.tag;
  proto.rep = rep;

  std::optional<IntervalSet> wald;
  if (cfg.wants(Method::Wald)) wald = wald_offline(cfg.model, data, cfg.alpha);

  RngStream count_rng = rep_rng.child(static_cast<std::uint64_t>(StreamRole::BucketCount));
  const int buckets = hulc_batch_count(cfg.alpha, count_rng.uniform());

  const bool need_buckets = cfg.wants(Method::Hulc) || cfg.wants(Method::Tstat);
  Eigen::VectorXd theta0_full;
  if (cfg.runs_plugin()) theta0_full = initial_value(cfg, std::span<const DataPoint>(data));
  std::vector<Eigen::VectorXd> theta0_bucket;
  if (need_buckets) {
    for (int j = 0; j < buckets; ++j) theta0_bucket.push_back(initial_value(cfg, bucket_view(data, j, buckets)));
  }

  std::vector<ResultRow> rows;
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    proto.c = cs[ci];
    proto.c_index = c_indices[ci];
    const StepSchedule sched = StepSchedule::polynomial(cs[ci], cfg.gamma);

    if (cfg.wants(Method::Wald)) {
      if (wald) {
        emit(rows, proto, Method::Wald, *wald, spec.theta_star, true);
      } else {
        emit_unavailable(rows, proto, Method::Wald, cfg.d, nullptr);
      }
    }

    if (cfg.runs_plugin()) {
      OptimizerState state(cfg.algorithm, theta0_full, noise_root.child(0));
      PluginAccumulator acc(cfg.d);
      for (const DataPoint& p : data) {
        acc.update(cfg.model, state.theta(), p);
        state.step(sched, cfg.model, p);
      }
      const auto plugin = plugin_interval(acc, state.estimate(), cfg.alpha);
      if (plugin) {
        emit(rows, proto, Method::Plugin, *plugin, spec.theta_star, true);
      } else {
        emit_unavailable(rows, proto, Method::Plugin, cfg.d, &state.estimate());
      }
    }

    if (need_buckets) {
      BucketSet set;
      for (int j = 0; j < buckets; ++j) {
        set.estimates.push_back(run_stream(cfg.algorithm, sched, cfg.model, theta0_bucket[j],
                                           bucket_view(data, j, buckets),
                                           noise_root.child(static_cast<std::uint64_t>(j) + 1)));
      }
      if (cfg.wants(Method::Hulc)) emit(rows, proto, Method::Hulc, hulc_interval(set, cfg.alpha), spec.theta_star, true);
      if (cfg.wants(Method::Tstat))
        emit(rows, proto, Method::Tstat, tstat_interval(set, cfg.alpha), spec.theta_star, true);
    }
  }
  return rows;
}

template <typename Task, typename Result>
void run_pool(std::size_t n_tasks, int threads, Task&& task, std::vector<Result>& results) {
  results.assign(n_tasks, Result{});
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_tasks; i = next++) {
      try {
        results[i] = task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(n_tasks)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Wald: return "wald";
    case Method::Plugin: return "plugin";
    case Method::Hulc: return "hulc";
    case Method::Tstat: return "tstat";
  }
  return "?";
}

std::vector<Method> all_methods() { return {Method::Wald, Method::Plugin, Method::Hulc, Method::Tstat}; }

void ExperimentConfig::validate() const {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(gamma > 0.5 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0.5, 1)");
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (t_grid.empty()) throw std::invalid_argument("at least one sample size T is required");
  if (c_grid.empty()) throw std::invalid_argument("at least one step constant c is required");
  for (double c : c_grid)
    if (!(c > 0.0)) throw std::invalid_argument("step constants c must be positive");
  if (methods.empty()) throw std::invalid_argument("at least one method is required");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be non-negative");
  if (theta0 && theta0->size() != d) throw std::invalid_argument("theta0 must have length d");
  const auto min_t = static_cast<std::int64_t>(10 * std::ceil(std::log2(2.0 / alpha)));
  for (auto t : t_grid) {
    if (t < min_t) throw std::invalid_argument("T must be at least 10 * ceil(log2(2/alpha)) = " + std::to_string(min_t));
    if (t < d) throw std::invalid_argument("T must be at least d");
  }
  try {
    algorithm.validate();
  } catch (const std::domain_error& e) {
    throw std::invalid_argument(e.what());
  }
}

ModelSpec ExperimentConfig::model_spec() const {
  ModelSpec spec = ModelSpec::make(model, d, cov);
  spec.noise_sd = noise_sd;
  return spec;
}

bool ExperimentConfig::wants(Method m) const { return std::ranges::find(methods, m) != methods.end(); }

bool ExperimentConfig::runs_plugin() const {
  return wants(Method::Plugin) && algorithm.tag == Algorithm::AveragedSgd;
}

RngStream replication_stream(std::uint64_t base_seed, int rep) {
  return RngStream(base_seed, static_cast<std::uint64_t>(rep));
}

std::vector<DataPoint> generate_dataset(const ModelSpec& spec, std::int64_t t, RngStream rng) {
  const auto chol = spd_factorize(covariance_matrix(spec.cov, spec.d - 1));
  if (!chol) throw std::logic_error("covariance matrix failed to factor");
  std::vector<DataPoint> data;
  data.reserve(t);
  for (std::int64_t i = 0; i < t; ++i) data.push_back(sample_point(spec, *chol, rng));
  return data;
}

std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::int64_t t, int rep) {
  std::vector<int> idx(cfg.c_grid.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  return replicate(cfg, t, cfg.c_grid, idx, rep);
}

std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::int64_t t, double c, int rep) {
  const double cs[] = {c};
  int idx[] = {0};
  const auto it = std::ranges::find(cfg.c_grid, c);
  if (it != cfg.c_grid.end()) idx[0] = static_cast<int>(it - cfg.c_grid.begin());
  return replicate(cfg, t, cs, idx, rep);
}

std::vector<ResultRow> run_grid(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  const std::size_t n_tasks = cfg.t_grid.size() * static_cast<std::size_t>(cfg.reps);
  std::vector<std::vector<ResultRow>> parts;
  run_pool(
      n_tasks, threads,
      [&](std::size_t i) {
        return run_replication(cfg, cfg.t_grid[i / cfg.reps], static_cast<int>(i % cfg.reps));
      },
      parts);
  std::vector<ResultRow> rows;
  for (auto& p : parts) rows.insert(rows.end(), p.begin(), p.end());
  std::ranges::stable_sort(rows, [](const ResultRow& a, const ResultRow& b) { return row_order_key(a) < row_order_key(b); });
  return rows;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::ranges::sort(values, nan_last_less);
  return values[(values.size() - 1) / 2];
}

std::vector<Summary> aggregate(std::span<const ResultRow> rows) {
  // (model, d, t, cov, algo, c_index, method, k)
  using Key = std::tuple<int, int, std::int64_t, int, int, int, int, int>;
  auto key_of = [](const ResultRow& r, Method m) {
    return Key{static_cast<int>(r.model), r.d, r.t, static_cast<int>(r.cov), static_cast<int>(r.algo), r.c_index,
               static_cast<int>(m), r.k};
  };
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[key_of(r, r.method)].push_back(&r);

  std::vector<Summary> out;
  for (const auto& [key, members] : groups) {
    const ResultRow& first = *members.front();
    Summary s;
    s.model = first.model;
    s.d = first.d;
    s.t = first.t;
    s.cov = first.cov;
    s.algo = first.algo;
    s.c = first.c;
    s.c_index = first.c_index;
    s.method = first.method;
    s.k = first.k;

    // Wald widths by replication, available reps only.
    std::map<int, double> wald_width;
    if (auto it = groups.find(key_of(first, Method::Wald)); it != groups.end()) {
      for (const ResultRow* w : it->second)
        if (!w->unavailable) wald_width[w->rep] = w->width;
    }
    s.n_wald_available = static_cast<int>(wald_width.size());

    const bool is_wald = first.method == Method::Wald;
    int covered = 0;
    int counted = 0;
    std::vector<double> widths;
    std::vector<double> widths_on_wald;
    std::vector<double> wald_on_wald;
    for (const ResultRow* r : members) {
      if (is_wald && r->unavailable) continue;
      ++counted;
      covered += r->covered ? 1 : 0;
      if (r->unavailable) continue;
      widths.push_back(r->width);
      if (auto w = wald_width.find(r->rep); w != wald_width.end()) {
        widths_on_wald.push_back(r->width);
        wald_on_wald.push_back(w->second);
      }
    }
    s.coverage = counted > 0 ? static_cast<double>(covered) / counted : kNaN;
    s.median_width = lower_median(widths);
    if (is_wald && !widths.empty()) {
      s.width_ratio = 1.0;
    } else if (!widths_on_wald.empty()) {
      s.width_ratio = lower_median(widths_on_wald) / lower_median(wald_on_wald);
    }
    out.push_back(s);
  }
  return out;
}

double expansion_residual(std::span<const DataPoint> stream, const Eigen::VectorXd& theta_star,
                          const Eigen::MatrixXd& j, const StepSchedule& sched, Eigen::VectorXd theta0) {
  if (stream.empty()) throw std::domain_error("expansion residual needs a non-empty stream");
  AlgorithmKind asgd{};
  asgd.tag = Algorithm::AveragedSgd;
  OptimizerState state(asgd, std::move(theta0));
  Eigen::VectorXd xi_sum = Eigen::VectorXd::Zero(theta_star.size());
  for (const DataPoint& p : stream) {
    const Eigen::VectorXd& prev = state.theta();
    xi_sum += loss_grad(ModelKind::Linear, prev, p) - j * (prev - theta_star);
    state.step(sched, ModelKind::Linear, p);
  }
  const auto l = spd_factorize(j);
  if (!l) throw std::domain_error("population Hessian is not positive definite");
  const double rt = std::sqrt(static_cast<double>(stream.size()));
  const Eigen::VectorXd rem = rt * (state.average() - theta_star) + spd_solve(*l, xi_sum) / rt;
  return std::sqrt(rem.dot(j * rem));
}

double expansion_residual(const ExperimentConfig& cfg, double c, std::int64_t t, int rep) {
  if (cfg.model != ModelKind::Linear) throw std::invalid_argument("expansion residual is defined for the linear model only");
  const ModelSpec spec = cfg.model_spec();
  const RngStream rep_rng = replication_stream(cfg.base_seed, rep);
  const auto data = generate_dataset(spec, t, rep_rng.child(static_cast<std::uint64_t>(StreamRole::Data)));
  const Eigen::VectorXd theta0 = initial_value(cfg, std::span<const DataPoint>(data));
  return expansion_residual(data, spec.theta_star, population_hessian(spec), StepSchedule::polynomial(c, cfg.gamma),
                            theta0);
}

std::vector<ResidualRow> run_residual_grid(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  if (cfg.model != ModelKind::Linear) throw std::invalid_argument("expansion residual is defined for the linear model only");
  const std::size_t per_t = cfg.c_grid.size() * static_cast<std::size_t>(cfg.reps);
  const std::size_t n_tasks = cfg.t_grid.size() * per_t;
  std::vector<ResidualRow> rows;
  run_pool(
      n_tasks, threads,
      [&](std::size_t i) {
        ResidualRow r;
        r.t = cfg.t_grid[i / per_t];
        r.c_index = static_cast<int>((i % per_t) / cfg.reps);
        r.c = cfg.c_grid[r.c_index];
        r.rep = static_cast<int>(i % cfg.reps);
        r.residual = expansion_residual(cfg, r.c, r.t, r.rep);
        return r;
      },
      rows);
  return rows;
}

}  // namespace hulc
