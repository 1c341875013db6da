#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectrade/rng.hpp"

namespace spectrade {

// Units: bandwidth in MHz, prices in abstract currency per MHz, utilities in
// abstract currency.

struct EnvironmentParams {
  double total_bandwidth_W = 30.0;
  double local_user_mean_lambda = 8.0;
  double snr_low_db = 9.0;
  double snr_high_db = 22.0;
};

struct OwnerParams {
  double c1 = 2.0;      // revenue per local user
  double c2 = 1.0;      // degradation cost weight
  double b_req = 1.0;   // required per-user throughput (bandwidth-equivalent)
  double k_c = 2.0;     // local spectral efficiency
  double rho_b = 0.5;   // utility/mean ratio threshold
  double t_b = 0.2;     // risk tolerance
  double p_min = 0.1;   // minimum asking price
};

struct RequesterParams {
  double omega = 10.0;
  double ber_target = 1e-3;
  double rho_d = 0.0;   // kept for traceability; the absolute margin delta_d is what is used
  double t_d = 0.2;
  double delta_d = 0.0;
};

struct NegotiationParams {
  double price_step = 0.1;
  double amount_step = 0.5;
  std::uint64_t max_iterations = 1000;
};

struct MarketConfig {
  EnvironmentParams environment;
  OwnerParams owner;
  RequesterParams requester;
  NegotiationParams negotiation;
  std::uint64_t mc_samples = 100000;
  std::uint64_t seed = 1;
};

enum class RiskMethod { analytic, monte_carlo };

const char* to_string(RiskMethod method);

struct RiskEstimate {
  double value = 0.0;
  RiskMethod method = RiskMethod::analytic;
  double half_width = 0.0;  // 95% confidence half-width; 0 for analytic
  std::uint64_t samples = 0;
};

struct ForwardContract {
  double price = 0.0;
  double amount = 0.0;
  RiskEstimate owner_risk;
  RiskEstimate requester_risk;
};

// One verdict per checked field, in declaration order.
struct FieldVerdict {
  std::string field;
  bool ok = true;
  std::string message;
};

std::vector<FieldVerdict> validate_fields(const MarketConfig& config);

// Throws ConfigError naming the first invalid field.
void validate(const MarketConfig& config);
void validate(const EnvironmentParams& env);

double db_to_linear(double gamma_db);
double linear_to_db(double gamma);

std::uint64_t sample_local_users(double lambda, Rng& rng);

// Uniform draw over [snr_low_db, snr_high_db] in dB.
double sample_snr_db(const EnvironmentParams& env, Rng& rng);
// Same draw, converted to a linear ratio.
double sample_snr(const EnvironmentParams& env, Rng& rng);

double poisson_pmf(std::int64_t k, double lambda);
// Pr{N <= k}, N ~ Poisson(lambda); 0 for k < 0.
double poisson_cdf(std::int64_t k, double lambda);
// Upper summation index for Poisson expectations: lambda + 40*sqrt(lambda) + 50.
std::int64_t poisson_truncation_cap(double lambda);

}  // namespace spectrade
