#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "spectrade/market_model.hpp"
#include "spectrade/onsite.hpp"

namespace spectrade {

// JSON layout mirrors the structs: top-level "environment", "owner",
// "requester", "negotiation" objects plus "mc_samples" and "seed". Every field
// is required and unknown fields are rejected. Structural problems throw
// ConfigError naming the field; value checks are left to validate().
MarketConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MarketConfig& config);

// Parses and validates.
MarketConfig load_config(const std::filesystem::path& path);
// Parses only; used by validate-config to report every field verdict.
MarketConfig load_config_unvalidated(const std::filesystem::path& path);

OnsiteParams onsite_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OnsiteParams& onsite);
OnsiteParams load_onsite(const std::filesystem::path& path);

// FNV-1a 64 over the canonical JSON dump, as 16 hex digits.
std::string config_digest(const MarketConfig& config);

}  // namespace spectrade
