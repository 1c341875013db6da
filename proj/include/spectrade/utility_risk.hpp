#pragma once

#include <cstdint>

#include "spectrade/market_model.hpp"
#include "spectrade/rng.hpp"

namespace spectrade {

// ---- Owner ----------------------------------------------------------------

// c1*n + p*r - c2*n*(b_req - k_c*(W - r)/n). With no local users the
// degradation term is taken as zero, leaving p*r.
// Throws std::domain_error unless 0 <= amount <= W.
double owner_utility(const OwnerParams& owner, const EnvironmentParams& env, double price,
                     double amount, std::uint64_t n_c);

// Poisson(lambda) expectation of owner_utility, summed until the remaining
// tail mass is below 1e-12 (capped at poisson_truncation_cap).
double owner_expected_utility(const OwnerParams& owner, const EnvironmentParams& env, double price,
                              double amount);

// Pr{U_b(n_c) <= rho_b * E[U_b]}. Throws InfeasiblePriceError if E[U_b] <= 0.
RiskEstimate owner_risk_analytic(const OwnerParams& owner, const EnvironmentParams& env,
                                 double price, double amount);
RiskEstimate owner_risk_monte_carlo(const OwnerParams& owner, const EnvironmentParams& env,
                                    double price, double amount, std::uint64_t samples, Rng& rng);

// ---- Requester ------------------------------------------------------------

// K = 1.5 / ln(0.2 / BER_target). Throws std::domain_error unless
// 0 < ber_target < 0.2.
double modulation_gap(const RequesterParams& requester);

// k_d = log2(1 + K*gamma), gamma linear.
double spectral_efficiency(const RequesterParams& requester, double gamma);

// omega*log2(1 + k_d*r) - p*r.
double requester_utility(const RequesterParams& requester, double price, double amount,
                         double gamma);

// Expectation over SNR uniform in dB, by 64-point Gauss-Legendre quadrature.
double requester_expected_utility(const RequesterParams& requester, const EnvironmentParams& env,
                                  double price, double amount);

// Pr{U_d(gamma) <= delta_d} (the minimum utility is zero). The analytic path
// inverts U_d in gamma and evaluates the uniform-dB CDF.
RiskEstimate requester_risk_analytic(const RequesterParams& requester,
                                     const EnvironmentParams& env, double price, double amount);
RiskEstimate requester_risk_monte_carlo(const RequesterParams& requester,
                                        const EnvironmentParams& env, double price, double amount,
                                        std::uint64_t samples, Rng& rng);

// Empirical frequency with a 95% normal-approximation half-width.
RiskEstimate bernoulli_estimate(std::uint64_t hits, std::uint64_t samples);

}  // namespace spectrade
