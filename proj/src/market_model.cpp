#include "spectrade/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectrade/errors.hpp"

namespace spectrade {

namespace {

constexpr double kRecurrenceLambdaLimit = 700.0;

class VerdictCollector {
 public:
  void check(const std::string& field, bool ok, const std::string& requirement) {
    verdicts_.push_back({field, ok, ok ? std::string() : "must satisfy " + requirement});
  }
  std::vector<FieldVerdict> take() { return std::move(verdicts_); }

 private:
  std::vector<FieldVerdict> verdicts_;
};

bool finite(double x) { return std::isfinite(x); }

void check_environment(VerdictCollector& out, const EnvironmentParams& env) {
  out.check("environment.total_bandwidth_W",
            finite(env.total_bandwidth_W) && env.total_bandwidth_W > 0, "total_bandwidth_W > 0");
  out.check("environment.local_user_mean_lambda",
            finite(env.local_user_mean_lambda) && env.local_user_mean_lambda > 0,
            "local_user_mean_lambda > 0");
  out.check("environment.snr_low_db", finite(env.snr_low_db), "finite value");
  out.check("environment.snr_high_db", finite(env.snr_high_db) && env.snr_low_db < env.snr_high_db,
            "snr_low_db < snr_high_db");
}

}  // namespace

const char* to_string(RiskMethod method) {
  return method == RiskMethod::analytic ? "analytic" : "monte_carlo";
}

std::vector<FieldVerdict> validate_fields(const MarketConfig& config) {
  VerdictCollector out;
  check_environment(out, config.environment);

  const OwnerParams& o = config.owner;
  out.check("owner.c1", finite(o.c1) && o.c1 >= 0, "c1 >= 0");
  out.check("owner.c2", finite(o.c2) && o.c2 >= 0, "c2 >= 0");
  out.check("owner.b_req", finite(o.b_req) && o.b_req > 0, "b_req > 0");
  out.check("owner.k_c", finite(o.k_c) && o.k_c > 0, "k_c > 0");
  out.check("owner.rho_b", o.rho_b > 0 && o.rho_b < 1, "0 < rho_b < 1");
  out.check("owner.t_b", o.t_b >= 0 && o.t_b <= 1, "0 <= t_b <= 1");
  out.check("owner.p_min", finite(o.p_min) && o.p_min >= 0, "p_min >= 0");

  const RequesterParams& r = config.requester;
  out.check("requester.omega", finite(r.omega) && r.omega > 0, "omega > 0");
  out.check("requester.ber_target", r.ber_target > 0 && r.ber_target < 0.2, "0 < ber_target < 0.2");
  out.check("requester.rho_d", finite(r.rho_d) && r.rho_d >= 0, "rho_d >= 0");
  out.check("requester.t_d", r.t_d >= 0 && r.t_d <= 1, "0 <= t_d <= 1");
  out.check("requester.delta_d", finite(r.delta_d) && r.delta_d >= 0, "delta_d >= 0");

  const NegotiationParams& n = config.negotiation;
  out.check("negotiation.price_step", finite(n.price_step) && n.price_step > 0, "price_step > 0");
  out.check("negotiation.amount_step", finite(n.amount_step) && n.amount_step > 0,
            "amount_step > 0");
  out.check("negotiation.max_iterations", n.max_iterations >= 1, "max_iterations >= 1");

  out.check("mc_samples", config.mc_samples >= 1, "mc_samples >= 1");
  return out.take();
}

void validate(const MarketConfig& config) {
  for (const FieldVerdict& v : validate_fields(config)) {
    if (!v.ok) throw ConfigError(v.field, v.message);
  }
}

void validate(const EnvironmentParams& env) {
  VerdictCollector out;
  check_environment(out, env);
  for (const FieldVerdict& v : out.take()) {
    if (!v.ok) throw ConfigError(v.field, v.message);
  }
}

double db_to_linear(double gamma_db) { return std::pow(10.0, gamma_db / 10.0); }

double linear_to_db(double gamma) { return 10.0 * std::log10(gamma); }

std::uint64_t sample_local_users(double lambda, Rng& rng) { return rng.poisson(lambda); }

double sample_snr_db(const EnvironmentParams& env, Rng& rng) {
  return rng.uniform(env.snr_low_db, env.snr_high_db);
}

double sample_snr(const EnvironmentParams& env, Rng& rng) {
  return db_to_linear(sample_snr_db(env, rng));
}

double poisson_pmf(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  const double kd = static_cast<double>(k);
  return std::exp(kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0));
}

double poisson_cdf(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  const std::int64_t last = std::min(k, poisson_truncation_cap(lambda));
  double sum = 0.0;
  if (lambda < kRecurrenceLambdaLimit) {
    double pmf = std::exp(-lambda);
    sum = pmf;
    for (std::int64_t i = 1; i <= last; ++i) {
      pmf *= lambda / static_cast<double>(i);
      sum += pmf;
    }
  } else {
    for (std::int64_t i = 0; i <= last; ++i) sum += poisson_pmf(i, lambda);
  }
  return std::min(sum, 1.0);
}

std::int64_t poisson_truncation_cap(double lambda) {
  return static_cast<std::int64_t>(std::ceil(lambda + 40.0 * std::sqrt(lambda) + 50.0));
}

}  // namespace spectrade
