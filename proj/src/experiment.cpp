#include "assp/cli/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "assp/error.hpp"

namespace assp::cli {

using nlohmann::json;

namespace {

constexpr std::size_t kAuditSamples = 200;

json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::optional<double> try_fit(const std::vector<long>& t, const std::vector<double>& v) {
  Series s{t, v};
  try {
    return fit_rate(s);
  } catch (const DegenerateSeries&) {
    return std::nullopt;
  }
}

std::vector<double> cumulative(const TraceTable& table) {
  std::vector<double> out;
  for (std::size_t k = 0; k < table.size(); ++k) {
    out.push_back(table.subopt_running[k] * static_cast<double>(table.t[k]));
  }
  return out;
}

ModeRun run_mode(const ExperimentConfig& cfg, const ProblemSpec& spec,
                 const MonteCarloObjective& evaluator, double f_star) {
  ModeRun out;
  out.mode = cfg.mode;
  const Hyperparams hp = cfg.hyperparams();
  out.tau = hp.tau;
  std::vector<TraceTable> tables;
  for (std::uint64_t seed : cfg.seeds) {
    RunOptions options;
    options.thin_every = cfg.thin_every;
    options.evaluator = &evaluator;
    if (cfg.problem == "pricing") options.on_row = apps::pricing_recorder(cfg.pricing);

    SeedRun run;
    run.seed = seed;
    run.trace = cfg.mode == Mode::sync ? run_synchronous(spec, hp, seed, options)
                                       : assp::run(spec, hp, cfg.schedule_for(seed), seed, options);
    run.table = make_table(run.trace, f_star);
    if (cfg.problem == "pricing") {
      run.sinr_db = apps::sinr_report(cfg.pricing, run.trace);
      run.revenue = apps::limiting_revenue(run.trace);
    }
    out.audit += run.trace.audit;
    tables.push_back(run.table);
    out.runs.push_back(std::move(run));
  }
  out.averaged = average_tables(tables);
  return out;
}

SummaryReport summarize(const ExperimentConfig& cfg, const ProblemSpec& spec, const ModeRun& run,
                        double f_star) {
  SummaryReport s;
  s.problem = cfg.problem;
  s.mode = run.mode;
  s.tau = run.tau;
  s.T = cfg.T;
  s.f_star = f_star;
  s.final_subopt_running = run.averaged.subopt_running.back();
  s.slope_subopt_cumsum = try_fit(run.averaged.t, cumulative(run.averaged));
  s.slope_violation_cumsum = try_fit(run.averaged.t, run.averaged.violation_agg_cumclip);
  s.audit = run.audit;

  if (cfg.problem == "pricing") {
    s.sinr_db.assign(cfg.pricing.M, 0.0);
    s.naive_sinr_db.assign(cfg.pricing.M, 0.0);
    double revenue = 0.0;
    for (const auto& r : run.runs) {
      const auto naive = apps::naive_baseline(cfg.pricing, r.seed, cfg.T);
      for (std::size_t i = 0; i < cfg.pricing.M; ++i) {
        s.sinr_db[i] += r.sinr_db[i] / static_cast<double>(run.runs.size());
        s.naive_sinr_db[i] += naive[i] / static_cast<double>(run.runs.size());
      }
      revenue += r.revenue / static_cast<double>(run.runs.size());
    }
    s.final_revenue = revenue;
  }

  s.estimates = audit_assumptions(spec, kAuditSamples, cfg.eval_seed);
  try {
    s.advice = advise(s.estimates, spec.n_nodes(), spec.n_duals(), run.tau, cfg.T);
  } catch (const NoFeasibleDelta& e) {
    s.advice_error = e.what();
  }
  return s;
}

json estimates_json(const AssumptionEstimates& e) {
  return {{"sigma_f2", e.sigma_f2},
          {"sigma_h2", e.sigma_h2},
          {"sigma_lambda2", e.sigma_lambda2},
          {"lipschitz_f", e.lipschitz_f}};
}

json advice_json(const std::optional<Advice>& advice, const std::string& error) {
  if (!advice) return {{"feasible", false}, {"error", error}};
  const auto& c = advice->constants;
  return {{"feasible", true},
          {"epsilon", advice->hyperparams.epsilon},
          {"delta", advice->hyperparams.delta},
          {"constants",
           {{"L2", c.L2},
            {"K", c.K},
            {"K1", c.K1},
            {"K2", c.K2},
            {"K3", c.K3},
            {"K4", c.K4},
            {"C", c.C},
            {"discriminant", c.discriminant}}}};
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::vector<std::filesystem::path> write_mode(const ModeRun& run, const std::filesystem::path& dir,
                                              const std::string& prefix, std::size_t thin) {
  std::vector<std::filesystem::path> files;
  for (const auto& r : run.runs) {
    files.push_back(dir / (prefix + "trace_seed" + std::to_string(r.seed) + ".csv"));
    write_csv(r.table, files.back(), thin);
  }
  files.push_back(dir / (prefix + "averaged.csv"));
  write_csv(run.averaged, files.back(), thin);
  return files;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TraceTable make_table(const RunTrace& trace, double f_star) {
  TraceTable table;
  const Series running = running_suboptimality(trace, f_star);
  const ViolationSeries violation = delayed_violation(trace);
  for (std::size_t k = 0; k < running.size(); ++k) {
    const long t = running.t[k];
    const auto& row = trace.rows[static_cast<std::size_t>(t)];
    table.t.push_back(t);
    table.f_hat.push_back(row.f_hat);
    table.subopt_running.push_back(running.value[k]);
    const double agg = violation.aggregate.empty() ? 0.0 : violation.aggregate.value[k];
    table.violation_agg_cumclip.push_back(agg);
    table.violation_agg_running.push_back(agg / static_cast<double>(t));
    table.lambda_norm.push_back(row.lambda_norm);
    table.max_staleness.push_back(row.max_staleness);
  }
  return table;
}

TraceTable average_tables(const std::vector<TraceTable>& tables) {
  if (tables.empty()) throw DegenerateSeries("no tables to average");
  TraceTable out = tables.front();
  const double n = static_cast<double>(tables.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double f = 0, s = 0, vr = 0, vc = 0, l = 0, m = 0;
    for (const auto& tab : tables) {
      if (tab.size() != out.size() || tab.t[k] != out.t[k]) {
        throw DimensionMismatch("tables cover different rows");
      }
      f += tab.f_hat[k];
      s += tab.subopt_running[k];
      vr += tab.violation_agg_running[k];
      vc += tab.violation_agg_cumclip[k];
      l += tab.lambda_norm[k];
      m = std::max(m, tab.max_staleness[k]);
    }
    out.f_hat[k] = f / n;
    out.subopt_running[k] = s / n;
    out.violation_agg_running[k] = vr / n;
    out.violation_agg_cumclip[k] = vc / n;
    out.lambda_norm[k] = l / n;
    out.max_staleness[k] = m;
  }
  return out;
}

void write_csv(const TraceTable& table, const std::filesystem::path& path, std::size_t thin_every) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "t,F_hat,subopt_running,violation_agg_running,violation_agg_cumclip,lambda_norm,max_staleness\n";
  const std::size_t thin = std::max<std::size_t>(thin_every, 1);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const long t = table.t[k];
    if (static_cast<std::size_t>(t) % thin != 0 && k + 1 != table.size()) continue;
    out << t << ',' << format_double(table.f_hat[k]) << ',' << format_double(table.subopt_running[k])
        << ',' << format_double(table.violation_agg_running[k]) << ','
        << format_double(table.violation_agg_cumclip[k]) << ',' << format_double(table.lambda_norm[k])
        << ',' << static_cast<long>(table.max_staleness[k]) << '\n';
  }
}

json SummaryReport::to_json() const {
  json doc = {{"problem", problem},
              {"mode", cli::to_string(mode)},
              {"tau", tau},
              {"T", T},
              {"f_star", f_star},
              {"final_subopt_running", finite_or_null(final_subopt_running)},
              {"slope_subopt_cumsum", optional_number(slope_subopt_cumsum)},
              {"slope_violation_cumsum", optional_number(slope_violation_cumsum)},
              {"audit",
               {{"pass", audit.clean()},
                {"negative_duals", audit.negative_duals},
                {"infeasible_iterates", audit.infeasible_iterates},
                {"staleness_over_bound", audit.staleness_over_bound},
                {"nonmonotone_indices", audit.nonmonotone_indices}}},
              {"assumptions", estimates_json(estimates)},
              {"advisor", advice_json(advice, advice_error)}};
  if (!sinr_db.empty()) {
    doc["sinr_db"] = sinr_db;
    doc["naive_sinr_db"] = naive_sinr_db;
  }
  if (final_revenue) doc["final_revenue"] = *final_revenue;
  return doc;
}

double optimum_value(const ExperimentConfig& cfg, const ProblemSpec& spec,
                     const MonteCarloObjective& evaluator) {
  Hyperparams hp = cfg.hyperparams();
  hp.tau = 0;
  return estimate_optimum(spec, hp, cfg.effective_optimum_budget(), cfg.eval_seed, evaluator).f_star;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write) {
  cfg.validate();
  const ProblemSpec spec = cfg.build_problem();
  const MonteCarloObjective evaluator(spec, cfg.mc_samples, cfg.eval_seed);
  const double f_star = optimum_value(cfg, spec, evaluator);

  ExperimentResult result;
  result.run = run_mode(cfg, spec, evaluator, f_star);
  result.summary = summarize(cfg, spec, result.run, f_star);
  if (write) {
    std::filesystem::create_directories(cfg.output_dir);
    result.files = write_mode(result.run, cfg.output_dir, "", cfg.thin_every);
    json doc = result.summary.to_json();
    doc["seeds"] = cfg.seeds;
    doc["config"] = to_json(cfg);
    result.files.push_back(cfg.output_dir / "summary.json");
    write_json(doc, result.files.back());
  }
  return result;
}

ComparisonResult compare_modes(const ExperimentConfig& cfg, bool write) {
  cfg.validate();
  const ProblemSpec spec = cfg.build_problem();
  const MonteCarloObjective evaluator(spec, cfg.mc_samples, cfg.eval_seed);
  const double f_star = optimum_value(cfg, spec, evaluator);

  ExperimentConfig sync_cfg = cfg;
  sync_cfg.mode = Mode::sync;
  sync_cfg.delay = DelaySchedule::zero();
  ExperimentConfig async_cfg = cfg;
  async_cfg.mode = Mode::async;

  ComparisonResult result;
  result.sync = run_mode(sync_cfg, spec, evaluator, f_star);
  result.async = run_mode(async_cfg, spec, evaluator, f_star);
  result.sync_summary = summarize(sync_cfg, spec, result.sync, f_star);
  result.async_summary = summarize(async_cfg, spec, result.async, f_star);
  result.final_ratio = result.async_summary.final_subopt_running / result.sync_summary.final_subopt_running;

  if (write) {
    const auto& dir = cfg.output_dir;
    std::filesystem::create_directories(dir);
    for (const auto& [run, prefix] : {std::pair{&result.sync, "sync_"}, std::pair{&result.async, "async_"}}) {
      auto files = write_mode(*run, dir, prefix, cfg.thin_every);
      result.files.insert(result.files.end(), files.begin(), files.end());
    }

    result.files.push_back(dir / "compare.csv");
    std::ofstream out(result.files.back(), std::ios::binary);
    if (!out) throw Error("cannot write " + result.files.back().string());
    out << "t,sync_F_hat,async_F_hat,sync_subopt_running,async_subopt_running,"
           "sync_violation_agg_cumclip,async_violation_agg_cumclip\n";
    const auto& s = result.sync.averaged;
    const auto& a = result.async.averaged;
    const std::size_t thin = std::max<std::size_t>(cfg.thin_every, 1);
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (static_cast<std::size_t>(s.t[k]) % thin != 0 && k + 1 != s.size()) continue;
      out << s.t[k] << ',' << format_double(s.f_hat[k]) << ',' << format_double(a.f_hat[k]) << ','
          << format_double(s.subopt_running[k]) << ',' << format_double(a.subopt_running[k]) << ','
          << format_double(s.violation_agg_cumclip[k]) << ','
          << format_double(a.violation_agg_cumclip[k]) << '\n';
    }
    out.close();

    json doc = {{"sync", result.sync_summary.to_json()},
                {"async", result.async_summary.to_json()},
                {"async_over_sync_final_subopt", finite_or_null(result.final_ratio)},
                {"seeds", cfg.seeds},
                {"config", to_json(cfg)}};
    result.files.push_back(dir / "compare_summary.json");
    write_json(doc, result.files.back());
  }
  return result;
}

std::vector<long> log_horizons(long lo, long hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 2) throw InvalidConfig("log_horizons: need 1 <= lo <= hi, count >= 2");
  std::vector<long> out;
  const double span = std::log(static_cast<double>(hi) / static_cast<double>(lo));
  for (std::size_t k = 0; k < count; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(count - 1);
    const long T = std::lround(static_cast<double>(lo) * std::exp(span * f));
    if (out.empty() || T > out.back()) out.push_back(T);
  }
  return out;
}

HorizonSweep sweep_horizons(const ExperimentConfig& cfg, const std::vector<long>& horizons) {
  cfg.validate();
  const ProblemSpec spec = cfg.build_problem();
  const MonteCarloObjective evaluator(spec, cfg.mc_samples, cfg.eval_seed);
  HorizonSweep out;
  out.f_star = optimum_value(cfg, spec, evaluator);
  const double n = static_cast<double>(cfg.seeds.size());
  for (long T : horizons) {
    Hyperparams hp = cfg.hyperparams();
    hp.T = T;
    hp.epsilon = 1.0 / std::sqrt(static_cast<double>(T));
    double subopt = 0.0, violation = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      RunOptions options;
      options.evaluator = &evaluator;
      options.thin_every = static_cast<std::size_t>(T);
      const RunTrace trace = cfg.mode == Mode::sync
                                 ? run_synchronous(spec, hp, seed, options)
                                 : assp::run(spec, hp, cfg.schedule_for(seed), seed, options);
      subopt += cumulative_suboptimality(trace, out.f_star).back() / n;
      const auto v = delayed_violation(trace).aggregate;
      violation += (v.empty() ? 0.0 : v.back()) / n;
      out.audit += trace.audit;
    }
    out.cumulative_subopt.t.push_back(T);
    out.cumulative_subopt.value.push_back(subopt);
    out.violation_cumclip.t.push_back(T);
    out.violation_cumclip.value.push_back(violation);
  }
  return out;
}

json advise_report(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec spec = cfg.build_problem();
  const AssumptionEstimates est = audit_assumptions(spec, kAuditSamples, cfg.eval_seed);
  std::optional<Advice> advice;
  std::string error;
  try {
    advice = advise(est, spec.n_nodes(), spec.n_duals(), cfg.hyperparams().tau, cfg.T);
  } catch (const NoFeasibleDelta& e) {
    error = e.what();
  }
  return {{"problem", cfg.problem},
          {"n_nodes", spec.n_nodes()},
          {"n_duals", spec.n_duals()},
          {"tau", cfg.hyperparams().tau},
          {"T", cfg.T},
          {"assumptions", estimates_json(est)},
          {"advisor", advice_json(advice, error)}};
}

json audit_report(const ExperimentConfig& cfg) {
  cfg.validate();
  const ProblemSpec spec = cfg.build_problem();
  const AssumptionEstimates est = audit_assumptions(spec, std::max(cfg.mc_samples, kAuditSamples), cfg.eval_seed);
  return {{"problem", cfg.problem},
          {"n_samples", std::max(cfg.mc_samples, kAuditSamples)},
          {"assumptions", estimates_json(est)}};
}

}  // namespace assp::cli
