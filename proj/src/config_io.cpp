#include "spectrade/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "spectrade/errors.hpp"

namespace spectrade {

namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label(), "expected a JSON object");
  }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned()) {
      if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
      throw ConfigError(field(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  const json& object(const std::string& key) {
    const json& v = at(key);
    if (!v.is_object()) throw ConfigError(field(key), "expected a JSON object");
    return v;
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  // Rejects anything that was not read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& at(const std::string& key) {
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(field(key), "missing required field");
    seen_.insert(key);
    return *it;
  }

  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON in ") + path.string() + ": " + e.what());
  }
}

}  // namespace

MarketConfig config_from_json(const json& j) {
  MarketConfig c;
  ObjectReader root(j, "");

  ObjectReader env(root.object("environment"), "environment");
  c.environment.total_bandwidth_W = env.number("total_bandwidth_W");
  c.environment.local_user_mean_lambda = env.number("local_user_mean_lambda");
  c.environment.snr_low_db = env.number("snr_low_db");
  c.environment.snr_high_db = env.number("snr_high_db");
  env.finish();

  ObjectReader owner(root.object("owner"), "owner");
  c.owner.c1 = owner.number("c1");
  c.owner.c2 = owner.number("c2");
  c.owner.b_req = owner.number("b_req");
  c.owner.k_c = owner.number("k_c");
  c.owner.rho_b = owner.number("rho_b");
  c.owner.t_b = owner.number("t_b");
  c.owner.p_min = owner.number("p_min");
  owner.finish();

  ObjectReader req(root.object("requester"), "requester");
  c.requester.omega = req.number("omega");
  c.requester.ber_target = req.number("ber_target");
  c.requester.rho_d = req.number("rho_d");
  c.requester.t_d = req.number("t_d");
  c.requester.delta_d = req.number("delta_d");
  req.finish();

  ObjectReader neg(root.object("negotiation"), "negotiation");
  c.negotiation.price_step = neg.number("price_step");
  c.negotiation.amount_step = neg.number("amount_step");
  c.negotiation.max_iterations = neg.count("max_iterations");
  neg.finish();

  c.mc_samples = root.count("mc_samples");
  c.seed = root.count("seed");
  root.finish();
  return c;
}

json to_json(const MarketConfig& c) {
  return json{
      {"environment",
       {{"total_bandwidth_W", c.environment.total_bandwidth_W},
        {"local_user_mean_lambda", c.environment.local_user_mean_lambda},
        {"snr_low_db", c.environment.snr_low_db},
        {"snr_high_db", c.environment.snr_high_db}}},
      {"owner",
       {{"c1", c.owner.c1},
        {"c2", c.owner.c2},
        {"b_req", c.owner.b_req},
        {"k_c", c.owner.k_c},
        {"rho_b", c.owner.rho_b},
        {"t_b", c.owner.t_b},
        {"p_min", c.owner.p_min}}},
      {"requester",
       {{"omega", c.requester.omega},
        {"ber_target", c.requester.ber_target},
        {"rho_d", c.requester.rho_d},
        {"t_d", c.requester.t_d},
        {"delta_d", c.requester.delta_d}}},
      {"negotiation",
       {{"price_step", c.negotiation.price_step},
        {"amount_step", c.negotiation.amount_step},
        {"max_iterations", c.negotiation.max_iterations}}},
      {"mc_samples", c.mc_samples},
      {"seed", c.seed},
  };
}

MarketConfig load_config_unvalidated(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

MarketConfig load_config(const std::filesystem::path& path) {
  MarketConfig c = load_config_unvalidated(path);
  validate(c);
  return c;
}

OnsiteParams onsite_from_json(const json& j) {
  ObjectReader r(j, "onsite");
  OnsiteParams o;
  o.n_requesters_mean = r.number("n_requesters_mean");
  o.r_qos = r.number("r_qos");
  o.price_cap = r.number("price_cap");
  r.finish();
  return o;
}

json to_json(const OnsiteParams& o) {
  return json{{"n_requesters_mean", o.n_requesters_mean},
              {"r_qos", o.r_qos},
              {"price_cap", o.price_cap}};
}

OnsiteParams load_onsite(const std::filesystem::path& path) {
  OnsiteParams o = onsite_from_json(read_json_file(path));
  validate(o);
  return o;
}

std::string config_digest(const MarketConfig& config) {
  const std::string text = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spectrade
