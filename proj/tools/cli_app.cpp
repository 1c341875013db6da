#include "cli_app.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "spectrade/config_io.hpp"
#include "spectrade/csv.hpp"
#include "spectrade/errors.hpp"
#include "spectrade/experiments.hpp"
#include "spectrade/negotiation.hpp"
#include "spectrade/utility_risk.hpp"

namespace spectrade::cli {

namespace {

namespace fs = std::filesystem;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << content;
  if (!f) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw IoError("output directory (--out) is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void require_file(const fs::path& path, const char* what) {
  if (path.empty()) throw IoError(std::string(what) + " path is required");
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path.string());
}

std::string describe(const RiskEstimate& r) {
  std::ostringstream s;
  s << format_number(r.value) << " (" << to_string(r.method) << ")";
  return s.str();
}

int run_validate(const RunManifest& m, std::ostream& out) {
  const MarketConfig config = load_config_unvalidated(m.config_path);
  bool all_ok = true;
  for (const FieldVerdict& v : validate_fields(config)) {
    out << (v.ok ? "ok    " : "FAIL  ") << v.field;
    if (!v.ok) out << ": " << v.message;
    out << '\n';
    all_ok = all_ok && v.ok;
  }
  out << (all_ok ? "config valid" : "config invalid") << '\n';
  return all_ok ? kOk : kConfigError;
}

MarketConfig effective_config(const RunManifest& m) {
  MarketConfig config = load_config(m.config_path);
  if (m.seed) config.seed = *m.seed;
  return config;
}

int run_negotiate(const RunManifest& m, std::ostream& out) {
  const MarketConfig config = effective_config(m);
  ensure_dir(m.output_dir);
  write_file(m.output_dir / "effective_config.json", to_json(config).dump(2) + "\n");

  const NegotiationTrace trace = negotiate(config);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_file(m.output_dir / "negotiation_trace.csv", csv.str());

  std::ostringstream summary;
  summary << "iterations " << trace.iterations.size() << '\n';
  summary << "termination " << to_string(trace.termination) << '\n';
  if (trace.outcome) {
    const ForwardContract& c = *trace.outcome;
    summary << "contract agreed\n";
    summary << "price " << format_number(c.price) << '\n';
    summary << "amount " << format_number(c.amount) << '\n';
    summary << "owner_risk " << describe(c.owner_risk) << " tolerance "
            << format_number(config.owner.t_b) << '\n';
    summary << "requester_risk " << describe(c.requester_risk) << " tolerance "
            << format_number(config.requester.t_d) << '\n';
    summary << "owner_expected_utility "
            << format_number(owner_expected_utility(config.owner, config.environment, c.price,
                                                    c.amount))
            << '\n';
    summary << "requester_expected_utility "
            << format_number(requester_expected_utility(config.requester, config.environment,
                                                        c.price, c.amount))
            << '\n';
  } else {
    summary << "no contract\n";
  }
  write_file(m.output_dir / "contract.txt", summary.str());
  out << summary.str();
  return trace.outcome ? kOk : kInfeasible;
}

int run_experiment_command(const RunManifest& m, std::ostream& out) {
  if (!m.experiment_id) throw std::invalid_argument("--experiment is required");
  const ExperimentId id = experiment_from_string(*m.experiment_id);
  const MarketConfig config = effective_config(m);
  OnsiteParams onsite;
  if (m.onsite_path) {
    require_file(*m.onsite_path, "onsite config");
    onsite = load_onsite(*m.onsite_path);
  }
  ensure_dir(m.output_dir);
  write_file(m.output_dir / "effective_config.json", to_json(config).dump(2) + "\n");
  write_file(m.output_dir / "effective_onsite.json", to_json(onsite).dump(2) + "\n");

  RunOptions options;
  options.seed = config.seed;
  options.episodes = m.episodes.value_or(0);
  options.threads = m.threads;
  const ExperimentResult result = run_experiment(id, config, onsite, options);

  std::ostringstream csv;
  write_experiment_csv(csv, result);
  write_file(m.output_dir / (std::string(to_string(id)) + ".csv"), csv.str());
  std::ostringstream summary;
  write_summary(summary, result);
  write_file(m.output_dir / "summary.txt", summary.str());
  out << summary.str();
  return kOk;
}

}  // namespace

int run(const RunManifest& m, std::ostream& out, std::ostream& err) {
  try {
    require_file(m.config_path, "config");
    switch (m.command) {
      case Command::validate_config:
        return run_validate(m, out);
      case Command::negotiate:
        return run_negotiate(m, out);
      case Command::experiment:
        return run_experiment_command(m, out);
    }
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::runtime_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

int main_with_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Futures-based spectrum trading simulator", "spectrade"};
  app.require_subcommand(1);

  RunManifest m;
  std::string config_path;
  std::string out_dir;
  std::string onsite_path;
  std::string experiment;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Market configuration JSON")->required();
    sub->add_option("--seed", seed, "Override the configured RNG seed");
  };

  CLI::App* negotiate_cmd = app.add_subcommand("negotiate", "Run one forward-contract negotiation");
  add_common(negotiate_cmd);
  negotiate_cmd->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Run a comparison experiment");
  add_common(experiment_cmd);
  experiment_cmd->add_option("--out", out_dir, "Output directory")->required();
  experiment_cmd
      ->add_option("--experiment", experiment,
                   "failure_curve | profit_comparison | price_series | fairness_curve")
      ->required();
  experiment_cmd->add_option("--episodes", episodes, "Episodes per sweep point")
      ->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--onsite-config", onsite_path, "On-site baseline parameters JSON");
  experiment_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  CLI::App* validate_cmd = app.add_subcommand("validate-config", "Check a configuration file");
  validate_cmd->add_option("--config", config_path, "Market configuration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // Top-level help lists every subcommand's flags too.
      const auto subs = app.get_subcommands({});
      const bool any_parsed =
          std::any_of(subs.begin(), subs.end(), [](CLI::App* s) { return s->parsed(); });
      if (!any_parsed) out << app.help();
      for (CLI::App* sub : subs) {
        if (!any_parsed || sub->parsed()) out << '\n' << sub->help();
      }
      return kOk;
    }
    err << e.what() << '\n';
    err << "run with --help for usage\n";
    return kUsageError;
  }

  if (negotiate_cmd->parsed()) {
    m.command = Command::negotiate;
  } else if (experiment_cmd->parsed()) {
    m.command = Command::experiment;
    m.experiment_id = experiment;
    if (experiment_cmd->count("--episodes")) m.episodes = episodes;
    if (!onsite_path.empty()) m.onsite_path = onsite_path;
    m.threads = threads;
  } else {
    m.command = Command::validate_config;
  }
  m.config_path = config_path;
  m.output_dir = out_dir;
  if (m.command != Command::validate_config) {
    CLI::App* sub = m.command == Command::negotiate ? negotiate_cmd : experiment_cmd;
    if (sub->count("--seed")) m.seed = seed;
  }
  return run(m, out, err);
}

}  // namespace spectrade::cli
