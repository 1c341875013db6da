#include "spectrade/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spectrade/config_io.hpp"
#include "spectrade/csv.hpp"
#include "spectrade/negotiation.hpp"
#include "spectrade/rng.hpp"
#include "spectrade/utility_risk.hpp"

namespace spectrade {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum StreamPurpose : std::uint64_t { kOnsiteStream = 0, kFuturesStream = 1 };

struct MeanSe {
  double mean = kNaN;
  double se = 0.0;
  std::uint64_t count = 0;
};

// NaN entries are skipped.
MeanSe mean_and_se(std::span<const double> xs) {
  MeanSe out;
  double sum = 0.0;
  for (double x : xs) {
    if (std::isnan(x)) continue;
    sum += x;
    ++out.count;
  }
  if (out.count == 0) return out;
  const double n = static_cast<double>(out.count);
  out.mean = sum / n;
  if (out.count > 1) {
    double ss = 0.0;
    for (double x : xs) {
      if (!std::isnan(x)) ss += (x - out.mean) * (x - out.mean);
    }
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

std::uint64_t episodes_or(const RunOptions& options, std::uint64_t fallback) {
  return options.episodes == 0 ? fallback : options.episodes;
}

Rng stream(const RunOptions& options, ExperimentId id, std::size_t point, std::size_t episode,
           StreamPurpose purpose) {
  return derive_stream(options.seed, {static_cast<std::uint64_t>(id) + 1, point, episode,
                                      static_cast<std::uint64_t>(purpose)});
}

ExperimentResult make_result(ExperimentId id, std::string sweep_variable,
                             const MarketConfig& config, const RunOptions& options) {
  ExperimentResult r;
  r.id = id;
  r.sweep_variable = std::move(sweep_variable);
  r.seed = options.seed;
  r.config_digest = config_digest(config);
  return r;
}

MetricRow row(double x, Scheme s, std::optional<double> value, double se, std::uint64_t episodes,
              std::string status = "ok") {
  return MetricRow{x, s, value, se, episodes, std::move(status)};
}

std::string fmt(double x) { return format_number(x); }

// Runs `episodes` on-site markets for one sweep point.
std::vector<OnsiteEpisodeResult> onsite_episodes(const MarketConfig& config,
                                                 const OnsiteParams& onsite,
                                                 const RunOptions& options, ExperimentId id,
                                                 std::size_t point, std::uint64_t episodes) {
  std::vector<OnsiteEpisodeResult> out(episodes);
  parallel_for(episodes, options.threads, [&](std::size_t e) {
    Rng rng = stream(options, id, point, e, kOnsiteStream);
    out[e] = clear_onsite_market(config, onsite, rng);
  });
  return out;
}

MarketConfig with_lambda(MarketConfig config, double lambda) {
  config.environment.local_user_mean_lambda = lambda;
  return config;
}

// Sum of squared deviations, computed on a sorted copy shifted by its
// minimum: exact zero for constant input and independent of input order.
struct Spread {
  double mean = 0.0;
  double sum_sq = 0.0;
  double sum_fourth = 0.0;
};

Spread spread_of(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  Spread out;
  if (v.empty()) return out;
  const double shift = v.front();
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x - shift;
  const double mean = sum / n;
  for (double x : v) {
    const double d = (x - shift) - mean;
    out.sum_sq += d * d;
    out.sum_fourth += d * d * d * d;
  }
  out.mean = shift + mean;
  return out;
}

double population_variance(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return spread_of(xs).sum_sq / static_cast<double>(xs.size());
}

}  // namespace

const char* to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::failure_curve:
      return "failure_curve";
    case ExperimentId::profit_comparison:
      return "profit_comparison";
    case ExperimentId::price_series:
      return "price_series";
    case ExperimentId::fairness_curve:
      return "fairness_curve";
  }
  return "unknown";
}

ExperimentId experiment_from_string(const std::string& name) {
  for (ExperimentId id : {ExperimentId::failure_curve, ExperimentId::profit_comparison,
                          ExperimentId::price_series, ExperimentId::fairness_curve}) {
    if (name == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

const char* to_string(Scheme scheme) { return scheme == Scheme::futures ? "futures" : "onsite"; }

std::vector<std::optional<double>> ExperimentResult::column(Scheme scheme) const {
  std::vector<std::optional<double>> out;
  for (const MetricRow& r : rows) {
    if (r.scheme == scheme) out.push_back(r.value);
  }
  return out;
}

std::vector<const MetricRow*> ExperimentResult::rows_for(Scheme scheme) const {
  std::vector<const MetricRow*> out;
  for (const MetricRow& r : rows) {
    if (r.scheme == scheme) out.push_back(&r);
  }
  return out;
}

double fairness(std::span<const double> revenues) {
  if (revenues.size() < 2) throw std::domain_error("fairness needs at least two values");
  const double var = spread_of(revenues).sum_sq / static_cast<double>(revenues.size() - 1);
  if (var == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / var;
}

double fairness_std_error(std::span<const double> revenues) {
  if (revenues.size() < 4) return kNaN;
  const double n = static_cast<double>(revenues.size());
  const Spread s = spread_of(revenues);
  const double var = s.sum_sq / (n - 1.0);
  if (var == 0.0) return 0.0;
  const double m4 = s.sum_fourth / n;
  const double var_of_var = std::max(0.0, (m4 - (n - 3.0) / (n - 1.0) * var * var) / n);
  return std::sqrt(var_of_var) / (var * var);
}

std::vector<double> default_lambda_sweep() {
  std::vector<double> out;
  for (int l = 2; l <= 20; l += 2) out.push_back(l);
  return out;
}

std::vector<double> default_requester_sweep() {
  std::vector<double> out;
  for (int m = 1; m <= 8; ++m) out.push_back(m);
  return out;
}

ExperimentResult run_failure_curve(const MarketConfig& config, const OnsiteParams& onsite,
                                   std::span<const double> lambdas, const RunOptions& options) {
  validate(config);
  validate(onsite);
  const std::uint64_t episodes = episodes_or(options, kDefaultSweepEpisodes);
  ExperimentResult result =
      make_result(ExperimentId::failure_curve, "local_user_mean_lambda", config, options);

  std::vector<MeanSe> onsite_stats;
  for (std::size_t point = 0; point < lambdas.size(); ++point) {
    const MarketConfig cfg = with_lambda(config, lambdas[point]);
    const auto eps = onsite_episodes(cfg, onsite, options, result.id, point, episodes);
    std::vector<double> rates(eps.size(), kNaN);
    for (std::size_t e = 0; e < eps.size(); ++e) {
      if (!eps[e].failures.empty()) {
        rates[e] = static_cast<double>(eps[e].failure_count()) /
                   static_cast<double>(eps[e].failures.size());
      }
    }
    const MeanSe s = mean_and_se(rates);
    onsite_stats.push_back(s);
    // A contract user is served by construction.
    result.rows.push_back(row(lambdas[point], Scheme::futures, 0.0, 0.0, episodes));
    result.rows.push_back(row(lambdas[point], Scheme::onsite,
                              s.count ? std::optional<double>(s.mean) : std::nullopt, s.se,
                              episodes, s.count ? "ok" : "no_requesters"));
  }

  if (!onsite_stats.empty()) {
    const MeanSe& first = onsite_stats.front();
    const MeanSe& last = onsite_stats.back();
    result.checks.push_back({"onsite failure near zero at smallest lambda (<= 0.05)",
                             first.count && first.mean <= 0.05, false,
                             "value " + fmt(first.mean)});
    result.checks.push_back({"onsite failure high at largest lambda (>= 0.5)",
                             last.count && last.mean >= 0.5, false, "value " + fmt(last.mean)});
    bool monotone = true;
    std::string worst;
    for (std::size_t i = 1; i < onsite_stats.size(); ++i) {
      const MeanSe& a = onsite_stats[i - 1];
      const MeanSe& b = onsite_stats[i];
      const double allowance = 2.0 * std::hypot(a.se, b.se);
      if (b.mean < a.mean - allowance) {
        monotone = false;
        worst = "drop at lambda " + fmt(lambdas[i]);
      }
    }
    result.checks.push_back({"onsite failure non-decreasing within 2 standard errors", monotone,
                             false, monotone ? "ok" : worst});
  }
  result.checks.push_back({"futures failure exactly zero", true, false, "by construction"});
  return result;
}

ExperimentResult run_profit_comparison(const MarketConfig& config, const OnsiteParams& onsite,
                                       std::span<const double> lambdas,
                                       const RunOptions& options) {
  validate(config);
  validate(onsite);
  const std::uint64_t episodes = episodes_or(options, kDefaultSweepEpisodes);
  ExperimentResult result =
      make_result(ExperimentId::profit_comparison, "local_user_mean_lambda", config, options);

  std::vector<double> gaps(lambdas.size(), kNaN);
  bool futures_consistent = true;
  for (std::size_t point = 0; point < lambdas.size(); ++point) {
    const MarketConfig cfg = with_lambda(config, lambdas[point]);
    const NegotiationTrace trace = negotiate(cfg);

    std::optional<double> futures_value;
    double futures_se = 0.0;
    std::string futures_status = "ok";
    if (trace.outcome) {
      const ForwardContract c = *trace.outcome;
      std::vector<double> profits(episodes);
      parallel_for(episodes, options.threads, [&](std::size_t e) {
        Rng rng = stream(options, result.id, point, e, kFuturesStream);
        const std::uint64_t n = sample_local_users(cfg.environment.local_user_mean_lambda, rng);
        profits[e] = owner_utility(cfg.owner, cfg.environment, c.price, c.amount, n);
      });
      const MeanSe s = mean_and_se(profits);
      futures_value = s.mean;
      futures_se = s.se;
      const double expected =
          owner_expected_utility(cfg.owner, cfg.environment, c.price, c.amount);
      if (std::abs(s.mean - expected) > 3.0 * s.se + 1e-9 * std::abs(expected)) {
        futures_consistent = false;
      }
    } else {
      futures_status = std::string("infeasible:") + to_string(trace.termination);
    }

    const auto eps = onsite_episodes(cfg, onsite, options, result.id, point, episodes);
    std::vector<double> profits(eps.size());
    for (std::size_t e = 0; e < eps.size(); ++e) profits[e] = eps[e].owner_profit;
    const MeanSe s = mean_and_se(profits);

    result.rows.push_back(
        row(lambdas[point], Scheme::futures, futures_value, futures_se, episodes, futures_status));
    result.rows.push_back(row(lambdas[point], Scheme::onsite, s.mean, s.se, episodes));
    if (futures_value) gaps[point] = *futures_value - s.mean;
  }

  result.checks.push_back({"futures profit matches closed-form expectation within 3 SE",
                           futures_consistent, false, ""});
  auto gap_at = [&](double lambda) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      if (lambdas[i] == lambda) return gaps[i];
    }
    return kNaN;
  };
  const double g4 = gap_at(4.0);
  const double g16 = gap_at(16.0);
  result.checks.push_back({"profit gap shrinks from lambda 4 to 16", g16 < g4, true,
                           "gap(4) " + fmt(g4) + ", gap(16) " + fmt(g16)});
  std::size_t ahead = 0;
  std::size_t compared = 0;
  for (double g : gaps) {
    if (std::isnan(g)) continue;
    ++compared;
    if (g > 0) ++ahead;
  }
  result.checks.push_back({"futures profit above onsite at most points", 2 * ahead > compared,
                           true,
                           std::to_string(ahead) + " of " + std::to_string(compared) + " points"});
  return result;
}

ExperimentResult run_price_series(const MarketConfig& config, const OnsiteParams& onsite,
                                  const RunOptions& options) {
  validate(config);
  validate(onsite);
  const std::uint64_t episodes = episodes_or(options, kDefaultPriceSeriesEpisodes);
  ExperimentResult result = make_result(ExperimentId::price_series, "episode", config, options);

  const NegotiationTrace trace = negotiate(config);
  const auto eps = onsite_episodes(config, onsite, options, result.id, 0, episodes);

  std::vector<double> futures_prices;
  std::vector<double> onsite_prices;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const double x = static_cast<double>(e);
    if (trace.outcome) {
      result.rows.push_back(row(x, Scheme::futures, trace.outcome->price, 0.0, 1));
      futures_prices.push_back(trace.outcome->price);
    } else {
      result.rows.push_back(row(x, Scheme::futures, std::nullopt, 0.0, 1,
                                std::string("infeasible:") + to_string(trace.termination)));
    }
    result.rows.push_back(row(x, Scheme::onsite, eps[e].clearing_price, 0.0, 1));
    onsite_prices.push_back(eps[e].clearing_price);
  }

  const double fvar = population_variance(futures_prices);
  const double ovar = population_variance(onsite_prices);
  result.checks.push_back({"futures price variance is zero", trace.outcome && fvar == 0.0, false,
                           "variance " + fmt(fvar)});
  result.checks.push_back(
      {"onsite price variance is positive", ovar > 0.0, false, "variance " + fmt(ovar)});
  const MeanSe om = mean_and_se(onsite_prices);
  const double p_op = trace.outcome ? trace.outcome->price : kNaN;
  result.checks.push_back({"mean onsite price above futures price", om.mean > p_op, true,
                           "onsite mean " + fmt(om.mean) + ", futures " + fmt(p_op)});
  return result;
}

ExperimentResult run_fairness_curve(const MarketConfig& config, const OnsiteParams& onsite,
                                    std::span<const double> requester_means,
                                    const RunOptions& options) {
  validate(config);
  validate(onsite);
  const std::uint64_t episodes = episodes_or(options, kDefaultSweepEpisodes);
  ExperimentResult result =
      make_result(ExperimentId::fairness_curve, "n_requesters_mean", config, options);

  const NegotiationTrace trace = negotiate(config);
  std::vector<double> futures_column;
  std::vector<double> onsite_column;
  for (std::size_t point = 0; point < requester_means.size(); ++point) {
    OnsiteParams op = onsite;
    op.n_requesters_mean = requester_means[point];

    if (trace.outcome) {
      const double amount = trace.outcome->amount;
      std::vector<double> revenue(episodes);
      parallel_for(episodes, options.threads, [&](std::size_t e) {
        Rng rng = stream(options, result.id, point, e, kFuturesStream);
        const double k_d = spectral_efficiency(config.requester, sample_snr(config.environment, rng));
        revenue[e] = std::log2(1.0 + k_d * amount);
      });
      const double f = revenue.size() >= 2 ? fairness(revenue) : kNaN;
      futures_column.push_back(f);
      result.rows.push_back(row(requester_means[point], Scheme::futures,
                                std::isnan(f) ? std::nullopt : std::optional<double>(f),
                                fairness_std_error(revenue), episodes,
                                std::isnan(f) ? "insufficient_samples" : "ok"));
    } else {
      futures_column.push_back(kNaN);
      result.rows.push_back(row(requester_means[point], Scheme::futures, std::nullopt, 0.0,
                                episodes,
                                std::string("infeasible:") + to_string(trace.termination)));
    }

    const auto eps = onsite_episodes(config, op, options, result.id, point, episodes);
    std::vector<double> revenue;
    for (const OnsiteEpisodeResult& ep : eps) {
      for (std::size_t i = 0; i < ep.allocations.size(); ++i) {
        const double k_d = spectral_efficiency(config.requester, ep.requester_snrs[i]);
        revenue.push_back(std::log2(1.0 + k_d * ep.allocations[i]));
      }
    }
    const double f = revenue.size() >= 2 ? fairness(revenue) : kNaN;
    onsite_column.push_back(f);
    result.rows.push_back(row(requester_means[point], Scheme::onsite,
                              std::isnan(f) ? std::nullopt : std::optional<double>(f),
                              fairness_std_error(revenue), episodes,
                              std::isnan(f) ? "insufficient_samples" : "ok"));
  }

  // Operating point: the sweep value closest to the configured requester mean.
  std::size_t op_index = 0;
  for (std::size_t i = 1; i < requester_means.size(); ++i) {
    if (std::abs(requester_means[i] - onsite.n_requesters_mean) <
        std::abs(requester_means[op_index] - onsite.n_requesters_mean)) {
      op_index = i;
    }
  }
  if (!requester_means.empty()) {
    const double fu = futures_column[op_index];
    const double on = onsite_column[op_index];
    result.checks.push_back({"futures fairness above onsite at the operating point", fu > on,
                             false,
                             "n_requesters_mean " + fmt(requester_means[op_index]) +
                                 ": futures " + fmt(fu) + ", onsite " + fmt(on)});
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    bool all_finite = true;
    for (double f : futures_column) {
      if (!std::isfinite(f)) all_finite = false;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      sum += f;
    }
    const double spread = all_finite ? (hi - lo) / (sum / futures_column.size()) : kNaN;
    result.checks.push_back({"futures fairness relative spread <= 20%",
                             all_finite && spread <= 0.2, false, "spread " + fmt(spread)});
    std::size_t peak = 0;
    for (std::size_t i = 1; i < onsite_column.size(); ++i) {
      if (onsite_column[i] > onsite_column[peak]) peak = i;
    }
    const bool rise_fall = peak > 0 && peak + 1 < onsite_column.size();
    result.checks.push_back({"onsite fairness rises then falls", rise_fall, true,
                             "peak at n_requesters_mean " + fmt(requester_means[peak])});
  }
  return result;
}

ExperimentResult run_experiment(ExperimentId id, const MarketConfig& config,
                                const OnsiteParams& onsite, const RunOptions& options) {
  switch (id) {
    case ExperimentId::failure_curve: {
      const auto sweep = default_lambda_sweep();
      return run_failure_curve(config, onsite, sweep, options);
    }
    case ExperimentId::profit_comparison: {
      const auto sweep = default_lambda_sweep();
      return run_profit_comparison(config, onsite, sweep, options);
    }
    case ExperimentId::price_series:
      return run_price_series(config, onsite, options);
    case ExperimentId::fairness_curve: {
      const auto sweep = default_requester_sweep();
      return run_fairness_curve(config, onsite, sweep, options);
    }
  }
  throw std::invalid_argument("unknown experiment id");
}

void write_experiment_csv(std::ostream& out, const ExperimentResult& result) {
  CsvWriter csv(out);
  csv.row({"experiment_id", "sweep_variable", "sweep_value", "scheme", "value", "std_error",
           "episodes", "status", "seed", "config_digest"});
  for (const MetricRow& r : result.rows) {
    csv.row({to_string(result.id), result.sweep_variable, format_number(r.sweep_value),
             to_string(r.scheme), format_number(r.value), format_number(r.std_error),
             std::to_string(r.episodes), r.status, std::to_string(result.seed),
             result.config_digest});
  }
}

void write_summary(std::ostream& out, const ExperimentResult& result) {
  out << "experiment " << to_string(result.id) << '\n';
  out << "seed " << result.seed << '\n';
  out << "config_digest " << result.config_digest << '\n';
  for (const ShapeCheck& c : result.checks) {
    const char* tag = c.report_only ? (c.passed ? "REPORT yes " : "REPORT no  ")
                                    : (c.passed ? "PASS       " : "FAIL       ");
    out << tag << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ')';
    out << '\n';
  }
}

}  // namespace spectrade
