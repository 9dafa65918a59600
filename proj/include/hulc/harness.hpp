#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hulc/model.hpp"
#include "hulc/optim.hpp"
#include "hulc/rng.hpp"

namespace hulc {

enum class Method { Wald, Plugin, Hulc, Tstat };

std::string_view to_string(Method m);
std::vector<Method> all_methods();

/// Monte-Carlo experiment grid: every (T, c, replication) cell.
struct ExperimentConfig {
  ModelKind model = ModelKind::Linear;
  int d = 5;
  std::vector<std::int64_t> t_grid{1000};
  CovarianceKind cov = CovarianceKind::Identity;
  AlgorithmKind algorithm{};
  std::vector<double> c_grid{0.5};
  double gamma = 0.505;
  double alpha = 0.05;
  int reps = 200;
  std::uint64_t base_seed = 0;
  std::vector<Method> methods = all_methods();
  bool warm_start = true;
  /// Linear response noise scale; 1 is the standard model.
  double noise_sd = 1.0;
  /// Fixed theta^(0) for every run; overrides the warm start when set.
  std::optional<Eigen::VectorXd> theta0;

  ModelSpec model_spec() const;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  bool wants(Method m) const;
  /// Plug-in intervals exist only for averaged SGD.
  bool runs_plugin() const;
};

struct ResultRow {
  ModelKind model = ModelKind::Linear;
  int d = 0;
  std::int64_t t = 0;
  CovarianceKind cov = CovarianceKind::Identity;
  Algorithm algo = Algorithm::AveragedSgd;
  double c = 0.0;
  int c_index = 0;
  int rep = 0;
  Method method = Method::Wald;
  int k = 1;  // 1-based coordinate
  bool covered = false;
  double width = 0.0;
  double center = 0.0;
  bool unavailable = false;
};

struct Summary {
  ModelKind model = ModelKind::Linear;
  int d = 0;
  std::int64_t t = 0;
  CovarianceKind cov = CovarianceKind::Identity;
  Algorithm algo = Algorithm::AveragedSgd;
  double c = 0.0;
  int c_index = 0;
  Method method = Method::Wald;
  int k = 1;
  double coverage = 0.0;
  double median_width = 0.0;
  std::optional<double> width_ratio;
  int n_wald_available = 0;
};

/// Sub-stream roles under a replication's stream.
enum class StreamRole : std::uint64_t { Data = 0, BucketCount = 1, Noise = 2 };

/// Stream owned by replication `rep`.
RngStream replication_stream(std::uint64_t base_seed, int rep);

/// The replication's dataset: the first `t` draws of its data stream.
std::vector<DataPoint> generate_dataset(const ModelSpec& spec, std::int64_t t, RngStream rng);

/// Rows of one replication at sample size `t` for every c in the grid. All
/// methods and all c values consume the same dataset.
std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::int64_t t, int rep);

/// Rows of one replication restricted to a single step constant `c`.
std::vector<ResultRow> run_replication(const ExperimentConfig& cfg, std::int64_t t, double c, int rep);

/// Runs the full grid on `threads` workers; rows sorted by (t, c, rep, method, k).
/// Output is independent of the thread count.
std::vector<ResultRow> run_grid(const ExperimentConfig& cfg, int threads);

/// Lower median: element (n - 1) / 2 of the sorted values; NaN sorts last.
double lower_median(std::vector<double> values);

/// Per (t, c, method, k): coverage over replications, median width, and the
/// width ratio against Wald over the replications where Wald is available.
std::vector<Summary> aggregate(std::span<const ResultRow> rows);

/// J-norm of the remainder sqrt(T)(avg - theta*) + T^{-1/2} sum J^{-1} xi_t
/// along an averaged-SGD run on `stream`, where
/// xi_t = grad(Z_t; theta_{t-1}) - J (theta_{t-1} - theta*) (linear model).
/// The noise enters SGD as -eta_t xi_t, so the leading term of
/// sqrt(T)(avg - theta*) is -T^{-1/2} sum J^{-1} xi_t.
double expansion_residual(std::span<const DataPoint> stream, const Eigen::VectorXd& theta_star,
                          const Eigen::MatrixXd& j, const StepSchedule& sched, Eigen::VectorXd theta0);

/// Residual for replication `rep` of a linear config at sample size `t`,
/// using that replication's dataset and warm start.
double expansion_residual(const ExperimentConfig& cfg, double c, std::int64_t t, int rep);

struct ResidualRow {
  std::int64_t t = 0;
  double c = 0.0;
  int c_index = 0;
  int rep = 0;
  double residual = 0.0;
};

std::vector<ResidualRow> run_residual_grid(const ExperimentConfig& cfg, int threads);

// report.cpp: text formats.

inline constexpr std::string_view kRawCsvHeader =
    "model,d,t,cov,algo,c,rep,method,k,covered,width,center,unavailable";
inline constexpr std::string_view kSummaryCsvHeader =
    "model,d,t,cov,algo,c,method,k,coverage,median_width,width_ratio,n_wald_available";
inline constexpr std::string_view kResidualCsvHeader = "model,d,t,cov,algo,c,rep,residual";

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

void write_raw_csv(std::ostream& os, std::span<const ResultRow> rows);
void write_summary_csv(std::ostream& os, std::span<const Summary> rows);
void write_residual_csv(std::ostream& os, const ExperimentConfig& cfg, std::span<const ResidualRow> rows);

/// JSON manifest: config echo, seed, grid sizes, tool version, wall clock.
std::string manifest_json(const ExperimentConfig& cfg, std::size_t n_rows, double wall_seconds,
                          std::string_view mode);

ModelKind parse_model(std::string_view s);
CovarianceKind parse_covariance(std::string_view s);
Algorithm parse_algorithm(std::string_view s);
Method parse_method(std::string_view s);

/// Default step-constant grid for (model, d, algorithm) from the grid data file.
std::vector<double> default_c_grid(ModelKind model, int d, Algorithm algo,
                                   const std::string& path = std::string(HULC_DATA_DIR) + "/c_grids.json");

}  // namespace hulc
