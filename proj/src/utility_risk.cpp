#include "spectrade/utility_risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spectrade/errors.hpp"
#include "spectrade/quadrature.hpp"

namespace spectrade {

namespace {

constexpr double kTailMass = 1e-12;

void check_amount(const EnvironmentParams& env, double amount) {
  if (!(amount >= 0.0 && amount <= env.total_bandwidth_W)) {
    throw std::domain_error("owner utility: amount must lie in [0, W]");
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Owner utility as a function of n_c, for the risk solver.
struct OwnerCurve {
  const OwnerParams& owner;
  const EnvironmentParams& env;
  double price;
  double amount;

  double operator()(std::int64_t n) const {
    return owner_utility(owner, env, price, amount, static_cast<std::uint64_t>(n));
  }
};

// Above this many users the Poisson CDF is 1 to double precision for any
// lambda the model accepts in practice.
std::int64_t saturating_index(double x, std::int64_t cap) {
  if (!(x < static_cast<double>(cap))) return cap;
  if (x < -1.0) return -1;
  return static_cast<std::int64_t>(std::floor(x));
}

}  // namespace

double owner_utility(const OwnerParams& owner, const EnvironmentParams& env, double price,
                     double amount, std::uint64_t n_c) {
  check_amount(env, amount);
  const double sale = price * amount;
  if (n_c == 0) return sale;
  const double n = static_cast<double>(n_c);
  return owner.c1 * n + sale - owner.c2 * n * owner.b_req +
         owner.c2 * owner.k_c * (env.total_bandwidth_W - amount);
}

double owner_expected_utility(const OwnerParams& owner, const EnvironmentParams& env, double price,
                              double amount) {
  check_amount(env, amount);
  const double lambda = env.local_user_mean_lambda;
  const std::int64_t cap = poisson_truncation_cap(lambda);
  const bool recurrence = lambda < 700.0;
  double pmf = std::exp(-lambda);
  double mass = 0.0;
  double sum = 0.0;
  for (std::int64_t k = 0; k <= cap; ++k) {
    if (k > 0) pmf = recurrence ? pmf * lambda / static_cast<double>(k) : poisson_pmf(k, lambda);
    mass += pmf;
    sum += pmf * owner_utility(owner, env, price, amount, static_cast<std::uint64_t>(k));
    // Past the mode the terms shrink geometrically; stop once they no longer
    // register at double precision (well inside the 1e-12 tail budget).
    if (static_cast<double>(k) > lambda && 1.0 - mass < kTailMass && pmf < 1e-18) break;
  }
  return sum;
}

RiskEstimate owner_risk_analytic(const OwnerParams& owner, const EnvironmentParams& env,
                                 double price, double amount) {
  const double mean = owner_expected_utility(owner, env, price, amount);
  if (!(mean > 0.0)) {
    throw InfeasiblePriceError("owner risk undefined: expected utility is not positive");
  }
  const double threshold = owner.rho_b * mean;
  const double lambda = env.local_user_mean_lambda;
  const std::int64_t cap = poisson_truncation_cap(lambda);
  const OwnerCurve u{owner, env, price, amount};

  double risk = u(0) <= threshold ? poisson_pmf(0, lambda) : 0.0;

  // On n_c >= 1 the utility is affine: slope * n + intercept.
  const double slope = owner.c1 - owner.c2 * owner.b_req;
  const double intercept = u(1) - slope;
  if (slope == 0.0) {
    if (u(1) <= threshold) risk += 1.0 - poisson_cdf(0, lambda);
  } else if (slope > 0.0) {
    // {n >= 1 : n <= last}
    std::int64_t last = saturating_index((threshold - intercept) / slope, cap);
    if (last < cap) {
      while (last >= 1 && u(last) > threshold) --last;
      while (last + 1 <= cap && u(last + 1) <= threshold) ++last;
    }
    if (last >= 1) risk += poisson_cdf(last, lambda) - poisson_cdf(0, lambda);
  } else {
    // {n >= first}, first >= 1
    const double bound = std::ceil((threshold - intercept) / slope);
    std::int64_t first = bound <= 1.0 ? 1 : saturating_index(bound, cap + 1);
    if (first <= cap) {
      while (first > 1 && u(first - 1) <= threshold) --first;
      while (first <= cap && u(first) > threshold) ++first;
    }
    risk += 1.0 - poisson_cdf(first - 1, lambda);
  }
  return RiskEstimate{clamp01(risk), RiskMethod::analytic, 0.0, 0};
}

RiskEstimate owner_risk_monte_carlo(const OwnerParams& owner, const EnvironmentParams& env,
                                    double price, double amount, std::uint64_t samples, Rng& rng) {
  const double mean = owner_expected_utility(owner, env, price, amount);
  if (!(mean > 0.0)) {
    throw InfeasiblePriceError("owner risk undefined: expected utility is not positive");
  }
  const double threshold = owner.rho_b * mean;
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const std::uint64_t n = sample_local_users(env.local_user_mean_lambda, rng);
    if (owner_utility(owner, env, price, amount, n) <= threshold) ++hits;
  }
  return bernoulli_estimate(hits, samples);
}

double modulation_gap(const RequesterParams& requester) {
  if (!(requester.ber_target > 0.0 && requester.ber_target < 0.2)) {
    throw std::domain_error("spectral efficiency: ber_target must lie in (0, 0.2)");
  }
  return 1.5 / std::log(0.2 / requester.ber_target);
}

double spectral_efficiency(const RequesterParams& requester, double gamma) {
  return std::log2(1.0 + modulation_gap(requester) * gamma);
}

double requester_utility(const RequesterParams& requester, double price, double amount,
                         double gamma) {
  const double k_d = spectral_efficiency(requester, gamma);
  return requester.omega * std::log2(1.0 + k_d * amount) - price * amount;
}

double requester_expected_utility(const RequesterParams& requester, const EnvironmentParams& env,
                                  double price, double amount) {
  if (amount == 0.0) return 0.0;
  return interval_mean(gauss_legendre_64(), env.snr_low_db, env.snr_high_db, [&](double db) {
    return requester_utility(requester, price, amount, db_to_linear(db));
  });
}

RiskEstimate requester_risk_analytic(const RequesterParams& requester,
                                     const EnvironmentParams& env, double price, double amount) {
  const double K = modulation_gap(requester);
  RiskEstimate est{0.0, RiskMethod::analytic, 0.0, 0};
  if (amount == 0.0) {
    // U_d is identically zero.
    est.value = requester.delta_d >= 0.0 ? 1.0 : 0.0;
    return est;
  }
  // U_d <= delta  <=>  k_d <= k_star  <=>  gamma <= gamma_star.
  const double k_star =
      std::expm1((price * amount + requester.delta_d) / requester.omega * std::numbers::ln2) /
      amount;
  if (!(k_star > 0.0)) return est;
  const double gamma_star = std::expm1(k_star * std::numbers::ln2) / K;
  if (std::isinf(gamma_star)) {
    est.value = 1.0;
    return est;
  }
  const double gamma_star_db = linear_to_db(gamma_star);
  const double lo = env.snr_low_db;
  const double hi = env.snr_high_db;
  if (lo == hi) {
    est.value = gamma_star_db >= lo ? 1.0 : 0.0;
  } else {
    est.value = clamp01((gamma_star_db - lo) / (hi - lo));
  }
  return est;
}

RiskEstimate requester_risk_monte_carlo(const RequesterParams& requester,
                                        const EnvironmentParams& env, double price, double amount,
                                        std::uint64_t samples, Rng& rng) {
  modulation_gap(requester);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double gamma = sample_snr(env, rng);
    if (requester_utility(requester, price, amount, gamma) <= requester.delta_d) ++hits;
  }
  return bernoulli_estimate(hits, samples);
}

RiskEstimate bernoulli_estimate(std::uint64_t hits, std::uint64_t samples) {
  if (samples == 0) throw std::invalid_argument("monte carlo estimate needs at least one sample");
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  return RiskEstimate{p, RiskMethod::monte_carlo, 1.96 * std::sqrt(p * (1.0 - p) / n), samples};
}

}  // namespace spectrade
