#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "assp/advisor.hpp"
#include "assp/cli/config.hpp"
#include "assp/metrics.hpp"
#include "assp/trace.hpp"

namespace assp::cli {

/// Per-row columns written to every trace CSV, t = 1..T.
struct TraceTable {
  std::vector<long> t;
  std::vector<double> f_hat;
  std::vector<double> subopt_running;
  std::vector<double> violation_agg_running;
  std::vector<double> violation_agg_cumclip;
  std::vector<double> lambda_norm;
  std::vector<double> max_staleness;

  std::size_t size() const { return t.size(); }
};

TraceTable make_table(const RunTrace& trace, double f_star);
/// Pointwise mean of equally long tables; max_staleness takes the maximum.
TraceTable average_tables(const std::vector<TraceTable>& tables);
void write_csv(const TraceTable& table, const std::filesystem::path& path, std::size_t thin_every);

struct SeedRun {
  std::uint64_t seed = 0;
  RunTrace trace;
  TraceTable table;
  std::vector<double> sinr_db;  // pricing only
  double revenue = 0.0;         // pricing only: final-quarter mean
};

struct ModeRun {
  Mode mode = Mode::async;
  int tau = 0;
  std::vector<SeedRun> runs;
  TraceTable averaged;
  TraceAudit audit;
};

struct SummaryReport {
  std::string problem;
  Mode mode = Mode::async;
  int tau = 0;
  long T = 0;
  double f_star = 0.0;
  double final_subopt_running = 0.0;
  /// Log-log slopes of the seed-averaged cumulative suboptimality and
  /// clipped cumulative violation; unset when the series is degenerate.
  std::optional<double> slope_subopt_cumsum;
  std::optional<double> slope_violation_cumsum;
  std::vector<double> sinr_db;
  std::vector<double> naive_sinr_db;
  std::optional<double> final_revenue;
  TraceAudit audit;
  AssumptionEstimates estimates;
  std::optional<Advice> advice;
  std::string advice_error;

  nlohmann::json to_json() const;
};

struct ExperimentResult {
  ModeRun run;
  SummaryReport summary;
  std::vector<std::filesystem::path> files;
};

struct ComparisonResult {
  ModeRun sync;
  ModeRun async;
  SummaryReport sync_summary;
  SummaryReport async_summary;
  /// Final running suboptimality, async over sync.
  double final_ratio = 0.0;
  std::vector<std::filesystem::path> files;
};

/// F* for the configured problem: long synchronous run scored by the
/// fixed-seed Monte Carlo evaluator.
double optimum_value(const ExperimentConfig& cfg, const ProblemSpec& spec,
                     const MonteCarloObjective& evaluator);

/// Runs every seed in the configured mode and summarizes. With `write`,
/// emits trace_seed<k>.csv, averaged.csv and summary.json under output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write = true);

/// Runs the configured problem synchronously and asynchronously (delay block
/// as configured) and writes both series side by side in compare.csv.
ComparisonResult compare_modes(const ExperimentConfig& cfg, bool write = true);

struct HorizonSweep {
  /// Seed-averaged sum_{u<=T}(F_hat(x_u) - F*) indexed by horizon T.
  Series cumulative_subopt;
  /// Seed-averaged clipped aggregate violation at t = T, indexed by T.
  Series violation_cumclip;
  double f_star = 0.0;
  TraceAudit audit;
};

/// Roughly log-spaced distinct horizons from lo to hi inclusive.
std::vector<long> log_horizons(long lo, long hi, std::size_t count);

/// One run per seed and horizon T with epsilon = 1/sqrt(T); F* is estimated
/// once from the configured T. Measures how the end-of-run totals scale with
/// the horizon.
HorizonSweep sweep_horizons(const ExperimentConfig& cfg, const std::vector<long>& horizons);

/// Assumption estimates and advisor output for the configured problem.
nlohmann::json advise_report(const ExperimentConfig& cfg);
nlohmann::json audit_report(const ExperimentConfig& cfg);

/// Shortest round-trip text for a double ("nan" / "inf" spelled out).
std::string format_double(double v);

}  // namespace assp::cli
