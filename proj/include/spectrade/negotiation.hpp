#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "spectrade/market_model.hpp"

namespace spectrade {

// A closed interval of grid-aligned amounts, or the empty range.
struct AmountRange {
  double lower = 0.0;
  double upper = 0.0;
  bool feasible = false;

  static AmountRange empty() { return {}; }
  bool contains(double amount) const { return feasible && lower <= amount && amount <= upper; }
  friend bool operator==(const AmountRange&, const AmountRange&) = default;
};

AmountRange intersect(const AmountRange& a, const AmountRange& b);

struct NegotiationStep {
  double price = 0.0;
  AmountRange owner_range;
  AmountRange requester_range;
  AmountRange overlap;
  std::optional<double> requester_choice;
  std::optional<double> requester_expected_utility;
};

enum class Termination { no_overlap, max_iterations, no_feasible_price };

const char* to_string(Termination t);

struct NegotiationTrace {
  std::vector<NegotiationStep> iterations;
  std::optional<ForwardContract> outcome;
  Termination termination = Termination::max_iterations;
};

struct BestResponse {
  double amount = 0.0;
  double expected_utility = 0.0;
};

// Grid helpers. Amounts are j*amount_step for j = 0..floor(W/amount_step);
// prices are p_min + k*price_step. Both are computed by multiplication so the
// same index always yields the same double.
std::vector<double> amount_grid(const MarketConfig& config);
double price_at(const MarketConfig& config, std::uint64_t index);

// Owner-side feasible amounts at a price: E[U_b] > 0 and analytic owner risk
// <= T_b. If the feasible grid points are not contiguous, the block holding
// the owner's best point (highest E[U_b], ties to the smaller amount) is
// returned.
AmountRange owner_acceptable_range(const MarketConfig& config, double price);

// Requester-side analogue: analytic requester risk <= T_d, block keyed to
// E[U_d].
AmountRange requester_acceptable_range(const MarketConfig& config, double price);

// Grid point in `overlap` maximizing E[U_d]; ties go to the smaller amount.
// Throws std::invalid_argument for an empty overlap.
BestResponse requester_best_response(const MarketConfig& config, double price,
                                     const AmountRange& overlap);

// Iterative forward-contract negotiation. The owner raises its price from
// p_min by price_step; at each price both sides announce their acceptable
// amount ranges, and if they overlap the requester picks its best amount. The
// sweep stops at the first non-overlap after some overlap, at max_iterations,
// or (before any overlap) once the requester range is empty (it stays empty
// at higher prices) or the owner range has been empty for ceil(W/price_step)
// consecutive prices. Among the accepted (price, amount) pairs the owner keeps
// the one with the highest E[U_b], ties to the lower price.
NegotiationTrace negotiate(const MarketConfig& config);

// Exhaustive oracle for negotiate(): per price it evaluates every grid point
// independently and rebuilds the ranges, overlap and best response from
// scratch.
std::optional<ForwardContract> brute_force_negotiate(const MarketConfig& config);

// price,owner_lo,owner_hi,req_lo,req_hi,choice,req_eu; empty cells for empty
// ranges and for prices with no overlap.
void write_trace_csv(std::ostream& out, const NegotiationTrace& trace);

}  // namespace spectrade
