#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assp/apps/consensus.hpp"
#include "assp/apps/pricing.hpp"
#include "assp/delay.hpp"
#include "assp/saddle.hpp"

namespace assp::cli {

enum class Mode { sync, async };

/// Fully defaulted experiment description. See README for the key table.
struct ExperimentConfig {
  std::string problem;  // "consensus_regression" | "pricing"
  apps::ConsensusRegressionConfig consensus;
  apps::PricingConfig pricing;
  /// Seed for problem construction (consensus ground-truth weights).
  std::uint64_t problem_seed = 1;

  double epsilon = 0.0;  // filled with 1/sqrt(T) when absent
  double delta = 1e-5;
  long T = 1000;
  Mode mode = Mode::async;

  DelaySchedule delay;
  /// Unset: every run keys its delay stream on its own seed.
  std::optional<std::uint64_t> delay_seed;

  std::size_t mc_samples = 500;
  long optimum_budget = 0;  // 0 means 10 T
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::uint64_t eval_seed = 20240;

  std::filesystem::path output_dir = "out";
  std::size_t thin_every = 1;

  Hyperparams hyperparams() const;
  /// Delay schedule used by the run with the given seed.
  DelaySchedule schedule_for(std::uint64_t seed) const;
  long effective_optimum_budget() const { return optimum_budget > 0 ? optimum_budget : 10 * T; }
  ProblemSpec build_problem() const;

  /// Throws ValidationError naming the offending key.
  void validate() const;
};

/// Throws ParseError (with line) for malformed JSON, ValidationError otherwise.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_json(const nlohmann::json& doc);

/// Echo of every effective setting, suitable for the summary file.
nlohmann::json to_json(const ExperimentConfig& cfg);

std::string to_string(Mode mode);

}  // namespace assp::cli
