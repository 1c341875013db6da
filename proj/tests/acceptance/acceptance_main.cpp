// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Report-only shape checks are printed but never gate.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spectrade/config_io.hpp"
#include "spectrade/errors.hpp"
#include "spectrade/experiments.hpp"
#include "spectrade/negotiation.hpp"
#include "spectrade/utility_risk.hpp"
#include "support/random_configs.hpp"

using namespace spectrade;

namespace {

struct Outcome {
  bool passed;
  std::string detail;
};

int failures = 0;

void report(int number, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s criterion %d: %s (%s) [%.1fs]\n", o.passed ? "PASS" : "FAIL", number,
              name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.passed) ++failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---- independent risk evaluators ------------------------------------------

double ref_owner_utility(const MarketConfig& c, double p, double r, std::int64_t n) {
  if (n == 0) return p * r;
  const double nn = static_cast<double>(n);
  const OwnerParams& o = c.owner;
  return o.c1 * nn + p * r -
         o.c2 * nn * (o.b_req - o.k_c * (c.environment.total_bandwidth_W - r) / nn);
}

double ref_owner_risk(const MarketConfig& c, double p, double r) {
  const double lambda = c.environment.local_user_mean_lambda;
  const std::int64_t top = static_cast<std::int64_t>(lambda + 60.0 * std::sqrt(lambda) + 100.0);
  std::vector<double> pmf(top + 1);
  for (std::int64_t n = 0; n <= top; ++n) {
    pmf[n] = std::exp(n * std::log(lambda) - lambda - std::lgamma(n + 1.0));
  }
  double eu = 0.0;
  for (std::int64_t n = 0; n <= top; ++n) eu += pmf[n] * ref_owner_utility(c, p, r, n);
  double risk = 0.0;
  for (std::int64_t n = 0; n <= top; ++n) {
    if (ref_owner_utility(c, p, r, n) <= c.owner.rho_b * eu) risk += pmf[n];
  }
  return std::min(1.0, risk);
}

double ref_requester_utility(const MarketConfig& c, double p, double r, double db) {
  const double k = 1.5 / std::log(0.2 / c.requester.ber_target);
  const double kd = std::log2(1.0 + k * std::pow(10.0, db / 10.0));
  return c.requester.omega * std::log2(1.0 + kd * r) - p * r;
}

// Measure of the dB interval where U_d <= delta, by bisection (U_d rises with SNR).
double ref_requester_risk(const MarketConfig& c, double p, double r) {
  const double lo = c.environment.snr_low_db;
  const double hi = c.environment.snr_high_db;
  const double delta = c.requester.delta_d;
  if (r == 0.0) return delta >= 0.0 ? 1.0 : 0.0;
  if (ref_requester_utility(c, p, r, hi) <= delta) return 1.0;
  if (ref_requester_utility(c, p, r, lo) > delta) return 0.0;
  double a = lo, b = hi;
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    (ref_requester_utility(c, p, r, m) <= delta ? a : b) = m;
  }
  return (a - lo) / (hi - lo);
}

// ---- shared randomized suite ----------------------------------------------

std::vector<MarketConfig> contracts_configs;

Outcome criterion_estimators() {
  Rng rng(20240601);
  const std::uint64_t n = 100000;
  int owner_ok = 0, requester_ok = 0, cases = 0;
  std::string worst;
  while (cases < 100) {
    const MarketConfig c = testing::random_config(rng);
    const double r = rng.uniform(1.0, c.environment.total_bandwidth_W);
    // Price that puts the requester's break-even SNR at a random quantile, so
    // both risks are usually strictly inside (0, 1).
    const double q = rng.uniform(0.05, 0.95);
    const double db = c.environment.snr_low_db +
                      q * (c.environment.snr_high_db - c.environment.snr_low_db);
    const double p = (ref_requester_utility(c, 0.0, r, db) - c.requester.delta_d) / r;
    if (!(p > 0.0)) continue;
    RiskEstimate owner_a;
    try {
      owner_a = owner_risk_analytic(c.owner, c.environment, p, r);
    } catch (const InfeasiblePriceError&) {
      continue;
    }
    ++cases;
    contracts_configs.push_back(c);
    Rng mc = derive_stream(7, {static_cast<std::uint64_t>(cases)});
    const RiskEstimate owner_m = owner_risk_monte_carlo(c.owner, c.environment, p, r, n, mc);
    const RiskEstimate req_a = requester_risk_analytic(c.requester, c.environment, p, r);
    const RiskEstimate req_m = requester_risk_monte_carlo(c.requester, c.environment, p, r, n, mc);
    auto within = [&](double a, double m) {
      return std::abs(a - m) <= 3.0 * std::sqrt(a * (1.0 - a) / static_cast<double>(n));
    };
    owner_ok += within(owner_a.value, owner_m.value);
    requester_ok += within(req_a.value, req_m.value);
  }
  return {owner_ok >= 95 && requester_ok >= 95,
          "owner " + std::to_string(owner_ok) + "/100, requester " +
              std::to_string(requester_ok) + "/100 within 3 sigma at N=1e5"};
}

std::vector<MarketConfig> edge_configs() {
  std::vector<MarketConfig> out;
  MarketConfig base;

  MarketConfig singleton = base;
  singleton.negotiation.max_iterations = 1;
  out.push_back(singleton);

  MarketConfig jointly_infeasible = base;
  jointly_infeasible.owner.t_b = 0.0;
  jointly_infeasible.requester.t_d = 0.0;
  jointly_infeasible.owner.p_min = 40.0;
  out.push_back(jointly_infeasible);

  MarketConfig owner_never = base;
  owner_never.owner.b_req = 200.0;
  owner_never.requester.t_d = 1.0;
  owner_never.negotiation.price_step = 1.0;
  out.push_back(owner_never);

  const auto contract = negotiate(base).outcome;
  MarketConfig tight_owner = base;
  tight_owner.owner.t_b = contract->owner_risk.value;
  out.push_back(tight_owner);

  MarketConfig tight_requester = base;
  tight_requester.requester.t_d = contract->requester_risk.value;
  out.push_back(tight_requester);

  MarketConfig vacuous = base;
  vacuous.owner.t_b = 1.0;
  vacuous.requester.t_d = 1.0;
  vacuous.negotiation.max_iterations = 300;
  out.push_back(vacuous);

  MarketConfig free_start = base;
  free_start.owner.p_min = 0.0;
  out.push_back(free_start);

  MarketConfig ragged = base;
  ragged.negotiation.amount_step = 0.7;
  out.push_back(ragged);

  MarketConfig margin = base;
  margin.requester.delta_d = 5.0;
  margin.owner.rho_b = 0.95;
  out.push_back(margin);

  MarketConfig crowded = base;
  crowded.environment.local_user_mean_lambda = 20.0;
  crowded.negotiation.price_step = 1.0;
  out.push_back(crowded);
  return out;
}

std::vector<std::pair<MarketConfig, ForwardContract>> all_contracts;

Outcome criterion_oracle() {
  Rng rng(777);
  int feasible = 0, drawn = 0, mismatches = 0, edge_contracts = 0;
  auto check = [&](const MarketConfig& c) {
    const NegotiationTrace t = negotiate(c);
    const auto oracle = brute_force_negotiate(c);
    const bool same = t.outcome.has_value() == oracle.has_value() &&
                      (!t.outcome || (t.outcome->price == oracle->price &&
                                      t.outcome->amount == oracle->amount));
    if (!same) ++mismatches;
    if (t.outcome) all_contracts.push_back({c, *t.outcome});
    return t.outcome.has_value();
  };
  while (feasible < 50) {
    const MarketConfig c = testing::random_negotiation_config(rng);
    ++drawn;
    if (negotiate(c).outcome) {
      ++feasible;
      check(c);
    }
  }
  const auto edges = edge_configs();
  for (const MarketConfig& c : edges) edge_contracts += check(c);
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 50 random feasible (" +
                               std::to_string(drawn) + " drawn) + " +
                               std::to_string(edges.size()) + " edge configs (" +
                               std::to_string(edge_contracts) + " with a contract)"};
}

Outcome criterion_soundness() {
  for (const MarketConfig& c : contracts_configs) {
    if (const auto o = negotiate(c).outcome) all_contracts.push_back({c, *o});
  }
  int violations = 0;
  double worst_gap = 0.0;
  for (const auto& [c, k] : all_contracts) {
    const double ro = owner_risk_analytic(c.owner, c.environment, k.price, k.amount).value;
    const double rr = requester_risk_analytic(c.requester, c.environment, k.price, k.amount).value;
    const double io = ref_owner_risk(c, k.price, k.amount);
    const double ir = ref_requester_risk(c, k.price, k.amount);
    worst_gap = std::max({worst_gap, std::abs(ro - io), std::abs(rr - ir)});
    if (ro > c.owner.t_b || rr > c.requester.t_d) ++violations;
    if (io > c.owner.t_b + 1e-9 || ir > c.requester.t_d + 1e-9) ++violations;
    if (k.owner_risk.value != ro || k.requester_risk.value != rr) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations over " +
                               std::to_string(all_contracts.size()) +
                               " contracts; max |analytic - independent| " + fmt(worst_gap)};
}

const ShapeCheck* find_check(const ExperimentResult& r, const std::string& prefix) {
  for (const ShapeCheck& c : r.checks) {
    if (c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

void print_report_only(const ExperimentResult& r) {
  for (const ShapeCheck& c : r.checks) {
    if (c.report_only) {
      std::printf("REPORT %s: %s (%s)\n", c.passed ? "yes" : "no ", c.name.c_str(),
                  c.detail.c_str());
    }
  }
}

RunOptions options(std::uint64_t episodes, unsigned threads) {
  RunOptions o;
  o.episodes = episodes;
  o.seed = 1;
  o.threads = threads;
  return o;
}

unsigned worker_count() { return std::max(2u, std::thread::hardware_concurrency()); }

Outcome criterion_failure_shape(const MarketConfig& config, const OnsiteParams& onsite) {
  const auto sweep = default_lambda_sweep();
  const ExperimentResult r = run_failure_curve(config, onsite, sweep, options(10000, worker_count()));
  std::string detail;
  bool ok = true;
  for (const char* name : {"onsite failure near zero", "onsite failure high",
                           "onsite failure non-decreasing", "futures failure exactly zero"}) {
    const ShapeCheck* c = find_check(r, name);
    ok = ok && c && c->passed;
    if (c) detail += std::string(c->passed ? "ok " : "NO ") + c->name + " [" + c->detail + "]; ";
  }
  for (const MetricRow* row : r.rows_for(Scheme::futures)) ok = ok && row->value == 0.0;
  return {ok, detail};
}

Outcome criterion_price_shape(const MarketConfig& config, const OnsiteParams& onsite) {
  const ExperimentResult r = run_price_series(config, onsite, options(1000, worker_count()));
  const ShapeCheck* f = find_check(r, "futures price variance is zero");
  const ShapeCheck* o = find_check(r, "onsite price variance is positive");
  print_report_only(r);
  const ExperimentResult profit = run_profit_comparison(config, onsite, default_lambda_sweep(),
                                                        options(10000, worker_count()));
  print_report_only(profit);
  return {f && o && f->passed && o->passed, "futures " + f->detail + ", onsite " + o->detail};
}

Outcome criterion_fairness_shape(const MarketConfig& config, const OnsiteParams& onsite) {
  const auto sweep = default_requester_sweep();
  const ExperimentResult r = run_fairness_curve(config, onsite, sweep, options(10000, worker_count()));
  const ShapeCheck* above = find_check(r, "futures fairness above onsite");
  const ShapeCheck* spread = find_check(r, "futures fairness relative spread");
  print_report_only(r);
  return {above && spread && above->passed && spread->passed,
          above->detail + "; " + spread->detail};
}

Outcome criterion_identities() {
  Rng rng(4242);
  auto dyadic = [&](int lo, int hi) {
    return static_cast<double>(lo + static_cast<int>(rng.next_u64() % (hi - lo + 1))) / 64.0;
  };
  int affinity_violations = 0;
  for (int i = 0; i < 1000; ++i) {
    OwnerParams o;
    o.c1 = dyadic(0, 256);
    o.c2 = dyadic(0, 256);
    o.b_req = dyadic(1, 256);
    o.k_c = dyadic(1, 256);
    EnvironmentParams env;
    const double p = dyadic(0, 640);
    const double r = static_cast<double>(rng.next_u64() % 232) / 8.0;
    const double h = static_cast<double>(1 + rng.next_u64() % 8) / 8.0;
    const std::uint64_t n = 1 + rng.next_u64() % 40;
    if (owner_utility(o, env, p, r, n + 1) - owner_utility(o, env, p, r, n) !=
        o.c1 - o.c2 * o.b_req) {
      ++affinity_violations;
    }
    if (owner_utility(o, env, p, r + h, n) - owner_utility(o, env, p, r, n) !=
        (p - o.c2 * o.k_c) * h) {
      ++affinity_violations;
    }
  }

  int monotone_violations = 0, curves = 0;
  std::vector<MarketConfig> configs{MarketConfig{}};
  Rng cfg_rng(99);
  for (int i = 0; i < 20; ++i) configs.push_back(testing::random_config(cfg_rng));
  for (const MarketConfig& c : configs) {
    for (double r : {0.5, 2.0, 7.5, c.environment.total_bandwidth_W}) {
      ++curves;
      // 100 prices spanning risk 0 through risk 1.
      const double p_top = 1.2 * ref_requester_utility(c, 0.0, r, c.environment.snr_high_db) / r;
      double prev = -1.0;
      for (int i = 0; i < 100; ++i) {
        const double p = p_top * i / 99.0;
        const double risk = requester_risk_analytic(c.requester, c.environment, p, r).value;
        if (risk < prev) ++monotone_violations;
        prev = risk;
      }
    }
  }
  return {affinity_violations == 0 && monotone_violations == 0,
          std::to_string(affinity_violations) + " affinity violations over 1000 draws, " +
              std::to_string(monotone_violations) + " monotonicity violations over " +
              std::to_string(curves) + " 100-point price curves"};
}

Outcome criterion_determinism(const MarketConfig& config, const OnsiteParams& onsite) {
  int differing = 0;
  for (auto id : {ExperimentId::failure_curve, ExperimentId::profit_comparison,
                  ExperimentId::price_series, ExperimentId::fairness_curve}) {
    std::string first;
    for (unsigned threads : {1u, 1u, worker_count()}) {
      std::ostringstream out;
      write_experiment_csv(out, run_experiment(id, config, onsite, options(0, threads)));
      if (first.empty()) {
        first = out.str();
      } else if (out.str() != first) {
        ++differing;
      }
    }
  }
  return {differing == 0, std::to_string(differing) +
                              " differing reruns across 4 experiments (1, 1 and " +
                              std::to_string(worker_count()) + " threads, default episodes)"};
}

}  // namespace

int main() {
  const MarketConfig config = load_config(SPECTRADE_DEFAULT_CONFIG);
  const OnsiteParams onsite;

  report(1, "analytic and Monte Carlo risk estimators agree", criterion_estimators);
  report(2, "negotiate equals brute-force oracle", criterion_oracle);
  report(3, "returned contracts satisfy both risk tolerances", criterion_soundness);
  report(4, "on-site failure curve steps up, futures failure zero",
         [&] { return criterion_failure_shape(config, onsite); });
  report(5, "futures price constant, on-site price fluctuates",
         [&] { return criterion_price_shape(config, onsite); });
  report(6, "futures fairness above on-site and nearly flat",
         [&] { return criterion_fairness_shape(config, onsite); });
  report(7, "owner utility affinity and requester risk monotonicity", criterion_identities);
  report(8, "experiments are byte-identical on rerun and across thread counts",
         [&] { return criterion_determinism(config, onsite); });

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
