#pragma once

#include <stdexcept>
#include <string>

namespace spectrade {

// Invalid configuration value; field() names the offending field path
// (e.g. "owner.rho_b").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// The owner's expected utility at (price, amount) is not positive, so the
// ratio-based owner risk is undefined. Negotiation treats this as a rejected
// grid point.
class InfeasiblePriceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace spectrade
