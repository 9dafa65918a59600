#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hulc/harness.hpp"

namespace hulc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_raw_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << kRawCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(r.model) << ',' << r.d << ',' << r.t << ',' << to_string(r.cov) << ',' << to_string(r.algo)
       << ',' << format_double(r.c) << ',' << r.rep << ',' << to_string(r.method) << ',' << r.k << ','
       << (r.covered ? 1 : 0) << ',' << format_double(r.width) << ',' << format_double(r.center) << ','
       << (r.unavailable ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& os, std::span<const Summary> rows) {
  os << kSummaryCsvHeader << '\n';
  for (const auto& s : rows) {
    os << to_string(s.model) << ',' << s.d << ',' << s.t << ',' << to_string(s.cov) << ',' << to_string(s.algo)
       << ',' << format_double(s.c) << ',' << to_string(s.method) << ',' << s.k << ','
       << format_double(s.coverage) << ',' << format_double(s.median_width) << ','
       << (s.width_ratio ? format_double(*s.width_ratio) : std::string()) << ',' << s.n_wald_available << '\n';
  }
}

void write_residual_csv(std::ostream& os, const ExperimentConfig& cfg, std::span<const ResidualRow> rows) {
  os << kResidualCsvHeader << '\n';
  for (const auto& r : rows) {
    os << to_string(cfg.model) << ',' << cfg.d << ',' << r.t << ',' << to_string(cfg.cov) << ','
       << to_string(Algorithm::AveragedSgd) << ',' << format_double(r.c) << ',' << r.rep << ','
       << format_double(r.residual) << '\n';
  }
}

std::string manifest_json(const ExperimentConfig& cfg, std::size_t n_rows, double wall_seconds,
                          std::string_view mode) {
  nlohmann::ordered_json j;
  j["tool"] = "hulc-sim";
  j["version"] = kToolVersion;
  j["mode"] = mode;
  j["config"] = {
      {"model", to_string(cfg.model)},
      {"d", cfg.d},
      {"t", cfg.t_grid},
      {"cov", to_string(cfg.cov)},
      {"algo", to_string(cfg.algorithm.tag)},
      {"c", cfg.c_grid},
      {"gamma", cfg.gamma},
      {"alpha", cfg.alpha},
      {"reps", cfg.reps},
      {"warm_start", cfg.warm_start},
      {"warm_start_protocol", "constant step 0.001 over the first floor(m/3) points of each (sub-)stream, "
                              "then the main loop over the full (sub-)stream"},
      {"truncation_eps2", cfg.algorithm.eps2},
      {"noise_sigma", cfg.algorithm.sigma},
      {"noise_beta", cfg.algorithm.beta},
  };
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.emplace_back(to_string(m));
  j["config"]["methods"] = methods;
  j["base_seed"] = cfg.base_seed;
  j["grid"] = {{"n_t", cfg.t_grid.size()}, {"n_c", cfg.c_grid.size()}, {"reps", cfg.reps}, {"rows", n_rows}};
  j["wall_clock_seconds"] = wall_seconds;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  j["finished_at_unix"] = static_cast<std::int64_t>(now);
  return j.dump(2);
}

ModelKind parse_model(std::string_view s) {
  if (s == "linear") return ModelKind::Linear;
  if (s == "logistic") return ModelKind::Logistic;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

CovarianceKind parse_covariance(std::string_view s) {
  if (s == "identity") return CovarianceKind::Identity;
  if (s == "toeplitz") return CovarianceKind::Toeplitz;
  if (s == "equicorr") return CovarianceKind::Equicorrelation;
  throw std::invalid_argument("unknown covariance '" + std::string(s) + "'");
}

Algorithm parse_algorithm(std::string_view s) {
  for (Algorithm a : {Algorithm::Sgd, Algorithm::AveragedSgd, Algorithm::ImplicitLast, Algorithm::ImplicitAverage,
                      Algorithm::RootSgd, Algorithm::TruncatedSgd, Algorithm::NoisyTruncatedSgd}) {
    if (s == to_string(a)) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

Method parse_method(std::string_view s) {
  for (Method m : all_methods())
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

std::vector<double> default_c_grid(ModelKind model, int d, Algorithm algo, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open c-grid file " + path);
  const auto j = nlohmann::json::parse(in);
  const std::string table = algo == Algorithm::AveragedSgd ? "asgd" : "other";
  const auto& by_model = j.at(table).at(std::string(to_string(model)));
  const std::string key = std::to_string(d);
  if (by_model.contains(key)) return by_model.at(key).get<std::vector<double>>();
  if (by_model.contains("default")) return by_model.at("default").get<std::vector<double>>();
  throw std::invalid_argument("no default c grid for " + std::string(to_string(model)) + " d=" + key +
                              "; pass --c explicitly");
}

}  // namespace hulc
