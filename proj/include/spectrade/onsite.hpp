#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "spectrade/market_model.hpp"
#include "spectrade/rng.hpp"

namespace spectrade {

// On-site (spot) baseline: a single-price Stackelberg market. The owner posts
// one per-MHz price chosen to maximize spot revenue, each requester buys its
// unconstrained utility-maximizing amount, and excess demand is rationed
// proportionally. A requester whose allocation falls below r_qos has failed.
struct OnsiteParams {
  double n_requesters_mean = 3.0;
  double r_qos = 2.0;      // MHz
  double price_cap = 10.0;
};

void validate(const OnsiteParams& onsite);

struct OnsiteEpisodeResult {
  std::uint64_t n_c = 0;
  std::vector<double> requester_snrs;  // linear
  double available = 0.0;              // A, MHz
  double clearing_price = 0.0;
  std::vector<double> allocations;
  std::vector<bool> failures;
  double owner_profit = 0.0;

  std::size_t failure_count() const;
  double allocated_total() const;
};

// Spectrum sellable without local degradation cost: max(0, W - n_c * b_req / k_c).
double available_spectrum(const EnvironmentParams& env, const OwnerParams& owner,
                          std::uint64_t n_c);

// Unconstrained maximizer of omega*log2(1 + k_d*r) - p*r over r >= 0.
double demand_for_efficiency(double omega, double price, double k_d);
double requester_demand(const RequesterParams& requester, double price, double gamma);

// Price grid p_min + j*price_step for j = 0.. while <= price_cap (at least p_min).
std::vector<double> onsite_price_grid(const MarketConfig& config, const OnsiteParams& onsite);

// Draw order: n_c, requester count, then one SNR per requester.
OnsiteEpisodeResult clear_onsite_market(const MarketConfig& config, const OnsiteParams& onsite,
                                        Rng& rng);

// Clears a market for already-drawn n_c and requester SNRs.
OnsiteEpisodeResult clear_onsite_market(const MarketConfig& config, const OnsiteParams& onsite,
                                        std::uint64_t n_c, std::vector<double> requester_snrs);

// One row per episode.
void write_episode_csv(std::ostream& out, std::span<const OnsiteEpisodeResult> episodes);

}  // namespace spectrade
