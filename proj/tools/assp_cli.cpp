// Experiment runner: assp <run|compare|advise|audit> <config.json> [flags]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "assp/cli/config.hpp"
#include "assp/cli/experiment.hpp"
#include "assp/error.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;
constexpr int kAuditFailure = 4;

constexpr const char* kOutputEnv = "ASSP_OUTPUT_DIR";

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> tau;
  std::optional<long> T;
};

nlohmann::json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw assp::ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    assp::cli::parse_config_text(text);  // rethrows as ParseError with the line
    throw;
  }
}

assp::cli::ExperimentConfig configure(const std::string& path, const Overrides& o) {
  nlohmann::json doc = load(path);
  if (!doc.is_object()) throw assp::ValidationError("top level must be an object");
  if (o.seed) doc["eval"]["seeds"] = {*o.seed};
  if (o.tau) doc["delay"]["tau_max"] = *o.tau;
  if (o.T) doc["algo"]["T"] = *o.T;
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') {
    doc["output"]["dir"] = env;
  }
  if (o.out) doc["output"]["dir"] = *o.out;
  return assp::cli::parse_config_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous stochastic saddle-point experiments"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  bool strict = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", overrides.seed, "run a single seed");
    sub->add_option("--out", overrides.out, "output directory (beats " + std::string(kOutputEnv) + ")");
    sub->add_option("--tau", overrides.tau, "maximum delay");
    sub->add_option("--T", overrides.T, "iterations");
  };
  auto* run = app.add_subcommand("run", "run every seed and write traces + summary");
  auto* compare = app.add_subcommand("compare", "run sync and async side by side");
  auto* advise = app.add_subcommand("advise", "print assumption estimates and advised epsilon, delta");
  auto* audit = app.add_subcommand("audit", "print assumption estimates");
  for (auto* sub : {run, compare, advise, audit}) add_common(sub);
  for (auto* sub : {run, compare}) sub->add_flag("--strict", strict, "exit 4 when the invariant audit fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const auto cfg = configure(config_path, overrides);
    bool audit_clean = true;
    if (run->parsed()) {
      const auto result = assp::cli::run_experiment(cfg);
      audit_clean = result.summary.audit.clean();
      std::cout << result.summary.to_json().dump(2) << '\n';
    } else if (compare->parsed()) {
      const auto result = assp::cli::compare_modes(cfg);
      audit_clean = result.sync_summary.audit.clean() && result.async_summary.audit.clean();
      std::cout << nlohmann::json{{"sync", result.sync_summary.to_json()},
                                  {"async", result.async_summary.to_json()},
                                  {"async_over_sync_final_subopt", result.final_ratio}}
                       .dump(2)
                << '\n';
    } else if (advise->parsed()) {
      std::cout << assp::cli::advise_report(cfg).dump(2) << '\n';
    } else {
      std::cout << assp::cli::audit_report(cfg).dump(2) << '\n';
    }
    if (strict && !audit_clean) {
      std::cerr << "invariant audit failed\n";
      return kAuditFailure;
    }
    return kOk;
  } catch (const assp::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const assp::ValidationError& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const assp::InvalidConfig& e) {
    std::cerr << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kRuntimeError;
  }
}
