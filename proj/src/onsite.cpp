#include "spectrade/onsite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "spectrade/csv.hpp"
#include "spectrade/errors.hpp"
#include "spectrade/utility_risk.hpp"

namespace spectrade {

void validate(const OnsiteParams& onsite) {
  if (!(onsite.n_requesters_mean > 0 && std::isfinite(onsite.n_requesters_mean))) {
    throw ConfigError("onsite.n_requesters_mean", "must be > 0");
  }
  if (!(onsite.r_qos > 0 && std::isfinite(onsite.r_qos))) {
    throw ConfigError("onsite.r_qos", "must be > 0");
  }
  if (!(onsite.price_cap > 0 && std::isfinite(onsite.price_cap))) {
    throw ConfigError("onsite.price_cap", "must be > 0");
  }
}

std::size_t OnsiteEpisodeResult::failure_count() const {
  return static_cast<std::size_t>(std::count(failures.begin(), failures.end(), true));
}

double OnsiteEpisodeResult::allocated_total() const {
  return std::accumulate(allocations.begin(), allocations.end(), 0.0);
}

double available_spectrum(const EnvironmentParams& env, const OwnerParams& owner,
                          std::uint64_t n_c) {
  const double local = static_cast<double>(n_c) * owner.b_req / owner.k_c;
  return std::max(0.0, env.total_bandwidth_W - local);
}

double demand_for_efficiency(double omega, double price, double k_d) {
  return std::max(0.0, omega / (price * std::numbers::ln2) - 1.0 / k_d);
}

double requester_demand(const RequesterParams& requester, double price, double gamma) {
  return demand_for_efficiency(requester.omega, price, spectral_efficiency(requester, gamma));
}

std::vector<double> onsite_price_grid(const MarketConfig& config, const OnsiteParams& onsite) {
  const double p_min = config.owner.p_min;
  const double step = config.negotiation.price_step;
  std::vector<double> grid{p_min};
  for (std::uint64_t j = 1;; ++j) {
    const double p = p_min + static_cast<double>(j) * step;
    if (p > onsite.price_cap + 1e-9 * step) break;
    grid.push_back(p);
  }
  return grid;
}

OnsiteEpisodeResult clear_onsite_market(const MarketConfig& config, const OnsiteParams& onsite,
                                        Rng& rng) {
  const std::uint64_t n_c = sample_local_users(config.environment.local_user_mean_lambda, rng);
  const std::uint64_t m = rng.poisson(onsite.n_requesters_mean);
  std::vector<double> snrs;
  snrs.reserve(m);
  for (std::uint64_t i = 0; i < m; ++i) snrs.push_back(sample_snr(config.environment, rng));
  return clear_onsite_market(config, onsite, n_c, std::move(snrs));
}

OnsiteEpisodeResult clear_onsite_market(const MarketConfig& config, const OnsiteParams& onsite,
                                        std::uint64_t n_c, std::vector<double> requester_snrs) {
  OnsiteEpisodeResult ep;
  ep.n_c = n_c;
  ep.requester_snrs = std::move(requester_snrs);
  ep.available = available_spectrum(config.environment, config.owner, n_c);

  const std::size_t m = ep.requester_snrs.size();
  std::vector<double> k_d(m);
  for (std::size_t i = 0; i < m; ++i) {
    k_d[i] = spectral_efficiency(config.requester, ep.requester_snrs[i]);
  }
  auto total_demand = [&](double price) {
    double sum = 0.0;
    for (double k : k_d) sum += demand_for_efficiency(config.requester.omega, price, k);
    return sum;
  };

  // Revenue p * min(A, D(p)); first (lowest) price wins ties.
  const std::vector<double> prices = onsite_price_grid(config, onsite);
  double best_price = prices.front();
  double best_revenue = best_price * std::min(ep.available, total_demand(best_price));
  for (std::size_t j = 1; j < prices.size(); ++j) {
    const double revenue = prices[j] * std::min(ep.available, total_demand(prices[j]));
    if (revenue > best_revenue) {
      best_revenue = revenue;
      best_price = prices[j];
    }
  }
  ep.clearing_price = best_price;

  ep.allocations.resize(m);
  double demand = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    ep.allocations[i] = demand_for_efficiency(config.requester.omega, best_price, k_d[i]);
    demand += ep.allocations[i];
  }
  if (demand > ep.available) {
    // Proportional rationing; shrink the factor until rounding cannot push
    // the total above A.
    double scale = ep.available / demand;
    for (;;) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        total += ep.allocations[i] * scale;
      }
      if (total <= ep.available) break;
      scale = std::nextafter(scale, 0.0);
    }
    for (double& a : ep.allocations) a *= scale;
  }

  ep.failures.resize(m);
  for (std::size_t i = 0; i < m; ++i) ep.failures[i] = ep.allocations[i] < onsite.r_qos;
  ep.owner_profit = best_price * ep.allocated_total();
  return ep;
}

void write_episode_csv(std::ostream& out, std::span<const OnsiteEpisodeResult> episodes) {
  CsvWriter csv(out);
  csv.row({"episode", "n_c", "requesters", "available", "clearing_price", "allocated",
           "failures", "owner_profit"});
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const OnsiteEpisodeResult& ep = episodes[e];
    csv.row({std::to_string(e), std::to_string(ep.n_c), std::to_string(ep.requester_snrs.size()),
             format_number(ep.available), format_number(ep.clearing_price),
             format_number(ep.allocated_total()), std::to_string(ep.failure_count()),
             format_number(ep.owner_profit)});
  }
}

}  // namespace spectrade
