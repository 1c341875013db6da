#include "spectrade/negotiation.hpp"

#include <cmath>
#include <stdexcept>

#include "spectrade/csv.hpp"
#include "spectrade/errors.hpp"
#include "spectrade/utility_risk.hpp"

namespace spectrade {

namespace {

using Index = std::ptrdiff_t;

// Per-grid-point acceptability and the side's own objective.
struct SideScan {
  std::vector<bool> ok;
  std::vector<double> score;
};

SideScan scan_owner(const MarketConfig& config, double price, const std::vector<double>& grid) {
  SideScan scan{std::vector<bool>(grid.size(), false), std::vector<double>(grid.size(), 0.0)};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double eu =
        owner_expected_utility(config.owner, config.environment, price, grid[j]);
    scan.score[j] = eu;
    if (eu > 0.0) {
      scan.ok[j] =
          owner_risk_analytic(config.owner, config.environment, price, grid[j]).value <=
          config.owner.t_b;
    }
  }
  return scan;
}

SideScan scan_requester(const MarketConfig& config, double price,
                        const std::vector<double>& grid) {
  SideScan scan{std::vector<bool>(grid.size(), false), std::vector<double>(grid.size(), 0.0)};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    scan.score[j] =
        requester_expected_utility(config.requester, config.environment, price, grid[j]);
    scan.ok[j] =
        requester_risk_analytic(config.requester, config.environment, price, grid[j]).value <=
        config.requester.t_d;
  }
  return scan;
}

// Contiguous run of acceptable points around the best acceptable point.
AmountRange block_around_best(const SideScan& scan, const std::vector<double>& grid) {
  Index best = -1;
  for (Index j = 0; j < static_cast<Index>(grid.size()); ++j) {
    if (scan.ok[j] && (best < 0 || scan.score[j] > scan.score[best])) best = j;
  }
  if (best < 0) return AmountRange::empty();
  Index lo = best;
  Index hi = best;
  while (lo > 0 && scan.ok[lo - 1]) --lo;
  while (hi + 1 < static_cast<Index>(grid.size()) && scan.ok[hi + 1]) ++hi;
  return AmountRange{grid[lo], grid[hi], true};
}

Index grid_index(const MarketConfig& config, double amount) {
  return static_cast<Index>(std::llround(amount / config.negotiation.amount_step));
}

std::uint64_t owner_patience(const MarketConfig& config) {
  return static_cast<std::uint64_t>(
      std::ceil(config.environment.total_bandwidth_W / config.negotiation.price_step));
}

ForwardContract make_contract(const MarketConfig& config, double price, double amount) {
  return ForwardContract{
      price, amount,
      owner_risk_analytic(config.owner, config.environment, price, amount),
      requester_risk_analytic(config.requester, config.environment, price, amount)};
}

}  // namespace

AmountRange intersect(const AmountRange& a, const AmountRange& b) {
  if (!a.feasible || !b.feasible) return AmountRange::empty();
  const double lo = std::max(a.lower, b.lower);
  const double hi = std::min(a.upper, b.upper);
  if (lo > hi) return AmountRange::empty();
  return AmountRange{lo, hi, true};
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::no_overlap:
      return "no_overlap";
    case Termination::max_iterations:
      return "max_iterations";
    case Termination::no_feasible_price:
      return "no_feasible_price";
  }
  return "unknown";
}

std::vector<double> amount_grid(const MarketConfig& config) {
  const double step = config.negotiation.amount_step;
  const auto count =
      static_cast<std::size_t>(std::floor(config.environment.total_bandwidth_W / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t j = 0; j <= count; ++j) {
    grid.push_back(std::min(static_cast<double>(j) * step, config.environment.total_bandwidth_W));
  }
  return grid;
}

double price_at(const MarketConfig& config, std::uint64_t index) {
  return config.owner.p_min + static_cast<double>(index) * config.negotiation.price_step;
}

AmountRange owner_acceptable_range(const MarketConfig& config, double price) {
  const std::vector<double> grid = amount_grid(config);
  return block_around_best(scan_owner(config, price, grid), grid);
}

AmountRange requester_acceptable_range(const MarketConfig& config, double price) {
  const std::vector<double> grid = amount_grid(config);
  return block_around_best(scan_requester(config, price, grid), grid);
}

BestResponse requester_best_response(const MarketConfig& config, double price,
                                     const AmountRange& overlap) {
  if (!overlap.feasible) {
    throw std::invalid_argument("requester_best_response: overlap is empty");
  }
  const std::vector<double> grid = amount_grid(config);
  const Index lo = std::max<Index>(0, grid_index(config, overlap.lower));
  const Index hi = std::min<Index>(static_cast<Index>(grid.size()) - 1,
                                   grid_index(config, overlap.upper));
  if (lo > hi) throw std::invalid_argument("requester_best_response: overlap is off the grid");
  BestResponse best{grid[lo], requester_expected_utility(config.requester, config.environment,
                                                         price, grid[lo])};
  for (Index j = lo + 1; j <= hi; ++j) {
    const double eu =
        requester_expected_utility(config.requester, config.environment, price, grid[j]);
    if (eu > best.expected_utility) best = {grid[j], eu};
  }
  return best;
}

NegotiationTrace negotiate(const MarketConfig& config) {
  validate(config);
  NegotiationTrace trace;
  trace.termination = Termination::max_iterations;

  bool overlapped = false;
  std::uint64_t owner_empty_run = 0;
  const std::uint64_t patience = owner_patience(config);

  struct Candidate {
    double price;
    double amount;
    double owner_eu;
  };
  std::optional<Candidate> best;

  for (std::uint64_t k = 0; k < config.negotiation.max_iterations; ++k) {
    NegotiationStep step;
    step.price = price_at(config, k);
    step.owner_range = owner_acceptable_range(config, step.price);
    step.requester_range = requester_acceptable_range(config, step.price);
    step.overlap = intersect(step.owner_range, step.requester_range);

    if (step.overlap.feasible) {
      const BestResponse br = requester_best_response(config, step.price, step.overlap);
      step.requester_choice = br.amount;
      step.requester_expected_utility = br.expected_utility;
      const double owner_eu =
          owner_expected_utility(config.owner, config.environment, step.price, br.amount);
      if (!best || owner_eu > best->owner_eu) best = Candidate{step.price, br.amount, owner_eu};
      overlapped = true;
      trace.iterations.push_back(step);
      continue;
    }

    trace.iterations.push_back(step);
    if (overlapped) {
      trace.termination = Termination::no_overlap;
      break;
    }
    if (!step.requester_range.feasible) {
      trace.termination = Termination::no_feasible_price;
      break;
    }
    owner_empty_run = step.owner_range.feasible ? 0 : owner_empty_run + 1;
    if (owner_empty_run >= patience) {
      trace.termination = Termination::no_feasible_price;
      break;
    }
  }

  if (best) trace.outcome = make_contract(config, best->price, best->amount);
  return trace;
}

std::optional<ForwardContract> brute_force_negotiate(const MarketConfig& config) {
  validate(config);
  const std::vector<double> grid = amount_grid(config);
  const Index n = static_cast<Index>(grid.size());

  // All maximal runs of true in `ok`; return the one holding `best`.
  auto run_containing = [&](const std::vector<bool>& ok, Index best) {
    std::pair<Index, Index> found{-1, -1};
    Index start = -1;
    for (Index j = 0; j <= n; ++j) {
      const bool on = j < n && ok[j];
      if (on && start < 0) start = j;
      if (!on && start >= 0) {
        if (start <= best && best <= j - 1) found = {start, j - 1};
        start = -1;
      }
    }
    return found;
  };

  auto best_point = [&](const std::vector<bool>& ok, const std::vector<double>& score) {
    Index best = -1;
    for (Index j = 0; j < n; ++j) {
      if (!ok[j]) continue;
      if (best < 0 || score[j] > score[best]) best = j;
    }
    return best;
  };

  std::optional<std::pair<double, double>> chosen;
  double chosen_eu = 0.0;
  bool overlapped = false;
  std::uint64_t owner_empty_run = 0;
  const std::uint64_t patience = owner_patience(config);

  for (std::uint64_t k = 0; k < config.negotiation.max_iterations; ++k) {
    const double price = price_at(config, k);
    std::vector<bool> owner_ok(n, false), req_ok(n, false);
    std::vector<double> owner_eu(n, 0.0), req_eu(n, 0.0);
    for (Index j = 0; j < n; ++j) {
      owner_eu[j] = owner_expected_utility(config.owner, config.environment, price, grid[j]);
      try {
        owner_ok[j] = owner_risk_analytic(config.owner, config.environment, price, grid[j]).value <=
                      config.owner.t_b;
      } catch (const InfeasiblePriceError&) {
        owner_ok[j] = false;
      }
      req_eu[j] = requester_expected_utility(config.requester, config.environment, price, grid[j]);
      req_ok[j] = requester_risk_analytic(config.requester, config.environment, price, grid[j])
                      .value <= config.requester.t_d;
    }

    const Index owner_best = best_point(owner_ok, owner_eu);
    const Index req_best = best_point(req_ok, req_eu);
    const auto owner_run = owner_best >= 0 ? run_containing(owner_ok, owner_best)
                                           : std::pair<Index, Index>{-1, -1};
    const auto req_run =
        req_best >= 0 ? run_containing(req_ok, req_best) : std::pair<Index, Index>{-1, -1};

    const Index lo = std::max(owner_run.first, req_run.first);
    const Index hi = std::min(owner_run.second, req_run.second);
    const bool overlap = owner_best >= 0 && req_best >= 0 && lo <= hi;

    if (overlap) {
      Index pick = lo;
      for (Index j = lo + 1; j <= hi; ++j) {
        if (req_eu[j] > req_eu[pick]) pick = j;
      }
      if (!chosen || owner_eu[pick] > chosen_eu) {
        chosen = std::make_pair(price, grid[pick]);
        chosen_eu = owner_eu[pick];
      }
      overlapped = true;
      continue;
    }
    if (overlapped || req_best < 0) break;
    owner_empty_run = owner_best >= 0 ? 0 : owner_empty_run + 1;
    if (owner_empty_run >= patience) break;
  }

  if (!chosen) return std::nullopt;
  return make_contract(config, chosen->first, chosen->second);
}

void write_trace_csv(std::ostream& out, const NegotiationTrace& trace) {
  CsvWriter csv(out);
  csv.row({"price", "owner_lo", "owner_hi", "req_lo", "req_hi", "choice", "req_eu"});
  auto lo = [](const AmountRange& r) { return r.feasible ? format_number(r.lower) : ""; };
  auto hi = [](const AmountRange& r) { return r.feasible ? format_number(r.upper) : ""; };
  for (const NegotiationStep& s : trace.iterations) {
    csv.row({format_number(s.price), lo(s.owner_range), hi(s.owner_range), lo(s.requester_range),
             hi(s.requester_range), format_number(s.requester_choice),
             format_number(s.requester_expected_utility)});
  }
}

}  // namespace spectrade
