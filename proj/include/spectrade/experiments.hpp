#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spectrade/market_model.hpp"
#include "spectrade/onsite.hpp"

namespace spectrade {

enum class ExperimentId { failure_curve, profit_comparison, price_series, fairness_curve };

const char* to_string(ExperimentId id);
// Throws std::invalid_argument for an unknown name.
ExperimentId experiment_from_string(const std::string& name);

enum class Scheme { futures, onsite };

const char* to_string(Scheme scheme);

struct MetricRow {
  double sweep_value = 0.0;
  Scheme scheme = Scheme::futures;
  std::optional<double> value;  // absent when the point could not be evaluated
  double std_error = 0.0;
  std::uint64_t episodes = 0;
  std::string status = "ok";
};

// A qualitative shape check; report-only checks are printed, never gated on.
struct ShapeCheck {
  std::string name;
  bool passed = false;
  bool report_only = false;
  std::string detail;
};

struct ExperimentResult {
  ExperimentId id = ExperimentId::failure_curve;
  std::string sweep_variable;
  std::vector<MetricRow> rows;  // sweep-point major, futures before onsite
  std::vector<ShapeCheck> checks;
  std::uint64_t seed = 0;
  std::string config_digest;

  // Values for one scheme in sweep order (absent values stay absent).
  std::vector<std::optional<double>> column(Scheme scheme) const;
  std::vector<const MetricRow*> rows_for(Scheme scheme) const;
};

struct RunOptions {
  std::uint64_t episodes = 0;  // 0 selects the experiment default
  std::uint64_t seed = 1;
  unsigned threads = 1;  // 0 = hardware concurrency
};

// Sample fairness 1 / var(x) with the unbiased variance. Zero variance gives
// +infinity. Throws std::domain_error for fewer than two values.
double fairness(std::span<const double> revenues);
// Delta-method standard error of fairness().
double fairness_std_error(std::span<const double> revenues);

std::vector<double> default_lambda_sweep();     // 2, 4, ..., 20
std::vector<double> default_requester_sweep();  // 1, ..., 8
constexpr std::uint64_t kDefaultSweepEpisodes = 10000;
constexpr std::uint64_t kDefaultPriceSeriesEpisodes = 200;

ExperimentResult run_failure_curve(const MarketConfig& config, const OnsiteParams& onsite,
                                   std::span<const double> lambdas, const RunOptions& options);
ExperimentResult run_profit_comparison(const MarketConfig& config, const OnsiteParams& onsite,
                                       std::span<const double> lambdas,
                                       const RunOptions& options);
ExperimentResult run_price_series(const MarketConfig& config, const OnsiteParams& onsite,
                                  const RunOptions& options);
ExperimentResult run_fairness_curve(const MarketConfig& config, const OnsiteParams& onsite,
                                    std::span<const double> requester_means,
                                    const RunOptions& options);

// Runs one experiment over its default sweep.
ExperimentResult run_experiment(ExperimentId id, const MarketConfig& config,
                                const OnsiteParams& onsite, const RunOptions& options);

// Header plus one row per sweep point x scheme.
void write_experiment_csv(std::ostream& out, const ExperimentResult& result);
void write_summary(std::ostream& out, const ExperimentResult& result);

// Calls fn(i) for i in [0, count) on up to `threads` workers. fn must only
// write to slot i of caller-owned storage.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn);

}  // namespace spectrade

#include "spectrade/detail/parallel.hpp"
