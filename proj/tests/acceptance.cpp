// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "assp/advisor.hpp"
#include "assp/apps/consensus.hpp"
#include "assp/apps/pricing.hpp"
#include "assp/cli/config.hpp"
#include "assp/cli/experiment.hpp"
#include "assp/error.hpp"
#include "assp/metrics.hpp"
#include "assp/rng.hpp"
#include "assp/saddle.hpp"
#include "oracles.hpp"

using namespace assp;
using namespace assp::cli;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

TraceAudit g_audit;
std::size_t g_audited_runs = 0;

void audit(const TraceAudit& a, std::size_t runs = 1) {
  g_audit += a;
  g_audited_runs += runs;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

bool report(const std::string& id, double limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool pass = out.pass;
  std::string detail = out.detail;
  if (limit_s > 0 && secs >= limit_s) {
    pass = false;
    detail += fmt("; runtime over %.0f s", limit_s);
  }
  std::printf("%s %s (%.1f s) %s\n", id.c_str(), pass ? "PASS" : "FAIL", secs, detail.c_str());
  std::fflush(stdout);
  return pass;
}

void info(const std::string& text) {
  std::printf("INFO %s\n", text.c_str());
  std::fflush(stdout);
}

ExperimentConfig consensus_config(long T) {
  auto cfg = parse_config_text(R"({
    "problem": {"name": "consensus_regression", "params": {"n_nodes": 5, "p": 4, "gamma": 0.5}},
    "eval": {"mc_samples": 2000, "seeds": [1, 2, 3, 4, 5]}
  })");
  cfg.T = T;
  cfg.epsilon = 1.0 / std::sqrt(static_cast<double>(T));
  return cfg;
}

ExperimentConfig pricing_config() {
  return parse_config(std::filesystem::path(ASSP_SOURCE_DIR) / "configs" / "pricing_reference.json");
}

bool same_bits(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (std::memcmp(&a[k], &b[k], sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome ac1() {
  const auto cfg = consensus_config(2000);
  const ProblemSpec spec = cfg.build_problem();
  const Hyperparams hp = cfg.hyperparams();
  std::size_t mismatches = 0, compared = 0;
  for (std::uint64_t seed : cfg.seeds) {
    const RunTrace a = run(spec, hp, DelaySchedule::zero(), seed);
    const RunTrace b = run_synchronous(spec, hp, seed);
    audit(a.audit);
    audit(b.audit);
    if (a.snapshots.size() != b.snapshots.size() || a.rows.size() != b.rows.size()) return {false, "length mismatch"};
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
      ++compared;
      bool same = same_bits(a.snapshots[k].lambda, b.snapshots[k].lambda);
      for (std::size_t i = 0; i < a.snapshots[k].x.size(); ++i) same = same && same_bits(a.snapshots[k].x[i], b.snapshots[k].x[i]);
      if (!same) ++mismatches;
    }
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      if (!same_bits(a.rows[k].delayed_slack, b.rows[k].delayed_slack) ||
          !same_bits(a.rows[k].current_slack, b.rows[k].current_slack)) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(compared) + " snapshots over 5 seeds, " + std::to_string(mismatches) +
                               " bitwise mismatches"};
}

struct RateResults {
  double subopt = NAN, violation = NAN;
};

RateResults rate_sweep(int tau) {
  auto cfg = consensus_config(10000);
  if (tau > 0) cfg.delay = DelaySchedule::uniform_random(tau, 0);
  const auto sweep = sweep_horizons(cfg, log_horizons(100, 10000, 16));
  audit(sweep.audit, 16 * cfg.seeds.size());
  return {fit_rate(sweep.cumulative_subopt, 0.0), fit_rate(sweep.violation_cumclip, 0.0)};
}

Outcome ac4(const ComparisonResult& cmp) {
  const auto& s = cmp.async_summary;
  const double target[2] = {29.0, 28.0};
  bool ok = s.sinr_db.size() == 2 && s.naive_sinr_db.size() == 2;
  std::string detail;
  for (std::size_t i = 0; ok && i < 2; ++i) {
    ok = ok && std::abs(s.sinr_db[i] - target[i]) <= 3.0 && std::abs(s.naive_sinr_db[i] - 22.0) <= 3.0 &&
         s.sinr_db[i] - s.naive_sinr_db[i] >= 4.0;
    detail += fmt("MU%.0f", static_cast<double>(i + 1)) + fmt(" SINR %.2f dB vs naive %.2f dB; ", s.sinr_db[i], s.naive_sinr_db[i]);
  }
  return {ok, detail + "targets 29/28 +-3, naive 22 +-3, gap >= 4"};
}

Outcome ac6(const ComparisonResult& cmp) {
  const auto& sync = cmp.sync.averaged;
  const auto& async = cmp.async.averaged;
  const double s_sync = sync.subopt_running.back();
  const double s_async = async.subopt_running.back();
  const long T = async.t.back();
  Series decade;
  double at_start = NAN;
  for (std::size_t k = 0; k < async.size(); ++k) {
    if (async.t[k] < T / 10) continue;
    if (std::isnan(at_start)) at_start = async.subopt_running[k];
    decade.t.push_back(async.t[k]);
    decade.value.push_back(async.subopt_running[k]);
  }
  const double slope = fit_rate(decade, 0.0);
  const bool ok = s_async >= s_sync && s_async < at_start && slope < 0.0;
  return {ok, fmt("final running subopt async %.4g vs sync %.4g; ", s_async, s_sync) +
                  fmt("async at T/10 %.4g -> T %.4g, ", at_start, s_async) +
                  fmt("final-decade log-log slope %.3f", slope)};
}

Outcome ac7() {
  std::size_t failures = 0, checks = 0;
  double worst_proj = 0.0, worst_grad = 0.0;
  // Projection against Dykstra and the variational inequality.
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 100, 0);
    const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
    const double lo = rng.uniform(-1, 0.5), hi = lo + rng.uniform(0.5, 3);
    const double a = rng.uniform(lo * n, hi * n);
    const double b = rng.uniform(a, hi * n + 1);
    const auto d = DomainSpec::sum_interval(static_cast<std::size_t>(n), a, b, lo, hi);
    const Vector u = oracle::random_vector(rng, n, lo - 3, hi + 3);
    const Vector p = project(d, u);
    const double err = (p - oracle::dykstra(d, u)).norm();
    worst_proj = std::max(worst_proj, err);
    ++checks;
    if (err > 1e-6 || !d.contains(p, 1e-12)) ++failures;
    for (int k = 0; k < 20; ++k) {
      const Vector y = project(d, oracle::random_vector(rng, n, lo - 1, hi + 1));
      ++checks;
      if ((u - p).dot(y - p) > 1e-9) ++failures;
    }
  }
  // Objective and Lagrangian gradients against central differences.
  auto check_grad = [&](const Vector& analytic, const Vector& numeric) {
    ++checks;
    const double rel = (analytic - numeric).norm() / std::max(1.0, analytic.norm());
    worst_grad = std::max(worst_grad, rel);
    if (rel > 1e-5) ++failures;
  };
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 101, 0);
    apps::ConsensusRegressionConfig c;
    const ProblemSpec spec = apps::build_consensus_problem(c, trial);
    EvaluationPoint at;
    for (NodeId i = 0; i < spec.n_nodes(); ++i) {
      at.x.push_back(oracle::random_vector(rng, 4, -2, 2));
      at.theta.push_back(sample_observation(spec, trial, i, 0));
    }
    const Vector lambda = oracle::random_vector(rng, static_cast<Eigen::Index>(spec.n_duals()), 0, 2);
    const auto grad = primal_gradient(spec, at, lambda);
    for (NodeId i = 0; i < spec.n_nodes(); ++i) {
      auto f = [&](const Vector& v) { return objective_value(spec, i, v, at.theta[i]); };
      check_grad(objective_grad(spec, i, at.x[i], at.theta[i]), oracle::central_gradient(f, at.x[i]));
      auto L = [&](const Vector& v) {
        EvaluationPoint q = at;
        q.x[i] = v;
        return stochastic_lagrangian(spec, q, lambda, Hyperparams{});
      };
      check_grad(grad[i], oracle::central_gradient(L, at.x[i]));
    }
  }
  apps::PricingConfig pc;
  const ProblemSpec pricing = apps::build_pricing_problem(pc);
  int points = 0;
  for (std::uint64_t trial = 0; points < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 102, 0);
    EvaluationPoint at;
    bool near_kink = false;
    for (NodeId n = 0; n < pricing.n_nodes(); ++n) {
      const auto K = static_cast<Eigen::Index>(pricing.dim(n));
      at.x.push_back(oracle::random_vector(rng, K, 0.05, 3.0));
      at.theta.push_back(oracle::random_vector(rng, 2 * K, 0.2, 8.0));
      for (Eigen::Index k = 0; k < K; ++k) {
        const double a = pc.c * pc.mu[n] + pc.nu[n] * at.x[n][k];
        if (std::abs(pc.W / a - 1.0 / at.theta[n][K + k]) < 1e-3) near_kink = true;
      }
    }
    if (near_kink) continue;
    ++points;
    const Vector lambda = oracle::random_vector(rng, static_cast<Eigen::Index>(pricing.n_duals()), 0, 3);
    const auto grad = primal_gradient(pricing, at, lambda);
    for (NodeId n = 0; n < pricing.n_nodes(); ++n) {
      auto L = [&](const Vector& v) {
        EvaluationPoint q = at;
        q.x[n] = v;
        return stochastic_lagrangian(pricing, q, lambda, Hyperparams{});
      };
      check_grad(grad[n], oracle::central_gradient(L, at.x[n]));
    }
  }
  // Rate fitting on synthetic power laws with multiplicative noise.
  double worst_rate = 0.0;
  for (double exponent : {0.5, 0.75}) {
    CounterRng rng(7, Stream::audit, 103, 0);
    Series s;
    for (long t = 1; t <= 10000; ++t) {
      s.t.push_back(t);
      s.value.push_back(2.5 * std::pow(static_cast<double>(t), exponent) * (1.0 + rng.uniform(-0.05, 0.05)));
    }
    const double err = std::abs(fit_rate(s) - exponent);
    worst_rate = std::max(worst_rate, err);
    ++checks;
    if (err > 0.01) ++failures;
  }
  // Pairwise and neighborhood encodings on a 3-node path.
  apps::ConsensusRegressionConfig c3;
  c3.n_nodes = 3;
  c3.edges = {{0, 1}, {1, 2}};
  c3.gamma = 0.2;
  const ProblemSpec pairwise = apps::build_consensus_problem(c3, 5);
  const ProblemSpec hood = to_neighborhood_form(pairwise);
  Hyperparams hp;
  hp.T = 2000;
  hp.epsilon = 0.02;
  const auto schedule = DelaySchedule::uniform_random(3, 8);
  const RunTrace a = run(pairwise, hp, schedule, 4);
  const RunTrace b = run_generalized(hood, hp, schedule, 4);
  audit(a.audit);
  audit(b.audit);
  double worst_enc = 0.0;
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    worst_enc = std::max(worst_enc, (a.snapshots[k].lambda - b.snapshots[k].lambda).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < 3; ++i) {
      worst_enc = std::max(worst_enc, (a.snapshots[k].x[i] - b.snapshots[k].x[i]).cwiseAbs().maxCoeff());
    }
  }
  ++checks;
  if (worst_enc > 1e-12) ++failures;
  return {failures == 0, std::to_string(checks) + " checks, " + std::to_string(failures) + " failed; " +
                             fmt("projection %.2e, gradient rel %.2e, ", worst_proj, worst_grad) +
                             fmt("rate %.4f, encoding %.2e", worst_rate, worst_enc)};
}

Outcome ac9() {
  std::size_t cases = 0, infeasible = 0, failures = 0;
  for (std::uint64_t trial = 0; trial < 2000; ++trial) {
    CounterRng rng(trial, Stream::audit, 104, 0);
    const AssumptionEstimates est{rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 5), rng.uniform(0, 3)};
    const std::size_t N = 1 + rng.below(8), M = rng.below(16);
    const int tau = static_cast<int>(rng.below(16));
    const long T = static_cast<long>(std::pow(10.0, rng.uniform(2, 12)));
    const double eps = 1.0 / std::sqrt(static_cast<double>(T));
    const auto ref = oracle::reference(est, static_cast<double>(N), static_cast<double>(M), tau, eps);
    ++cases;
    try {
      const Advice a = advise(est, N, M, tau, T);
      if (ref.disc < 0) ++failures;
      if (k4(est, N, M, tau, eps, a.hyperparams.delta) - a.hyperparams.delta > 0.0) ++failures;
    } catch (const NoFeasibleDelta&) {
      ++infeasible;
      if (ref.disc >= 0) ++failures;
    }
  }
  // The shipped instances at their configured horizons.
  for (const auto& cfg : {consensus_config(10000), pricing_config()}) {
    const ProblemSpec spec = cfg.build_problem();
    const auto est = audit_assumptions(spec, 200, cfg.eval_seed);
    const int tau = cfg.hyperparams().tau;
    const double eps = 1.0 / std::sqrt(static_cast<double>(cfg.T));
    const auto ref = oracle::reference(est, static_cast<double>(spec.n_nodes()),
                                       static_cast<double>(spec.n_duals()), tau, eps);
    ++cases;
    try {
      const Advice a = advise(est, spec.n_nodes(), spec.n_duals(), tau, cfg.T);
      if (ref.disc < 0 || a.constants.K4 - a.hyperparams.delta > 0.0) ++failures;
      info(cfg.problem + fmt(" advisor: delta %.4g, K4 - delta %.3g", a.hyperparams.delta,
                             a.constants.K4 - a.hyperparams.delta));
    } catch (const NoFeasibleDelta&) {
      ++infeasible;
      if (ref.disc >= 0) ++failures;
      info(cfg.problem + fmt(" advisor: no feasible delta, discriminant %.4g (T = %.0f)", ref.disc,
                             static_cast<double>(cfg.T)));
    }
  }
  return {failures == 0, std::to_string(cases) + " cases (" + std::to_string(infeasible) +
                             " infeasible), " + std::to_string(failures) + " inconsistent"};
}

}  // namespace

int main() {
  bool all = true;
  all &= report("AC1", 10, ac1);

  RateResults rates;
  const bool swept = report("AC2", 120, [&] {
    rates = rate_sweep(0);
    return Outcome{rates.subopt <= 0.6,
                   fmt("slope of cumulative suboptimality vs horizon %.3f (limit 0.6, theory 0.5)", rates.subopt)};
  });
  all &= swept;
  all &= report("AC3", 0, [&] {
    if (std::isnan(rates.violation)) return Outcome{false, "sweep did not complete"};
    return Outcome{rates.violation <= 0.8,
                   fmt("slope of clipped cumulative violation vs horizon %.3f (limit 0.8, theory 0.75)",
                       rates.violation)};
  });
  {
    // Diagnostics: one fixed-step run read within the run, and the sweep under delay.
    const auto result = run_experiment(consensus_config(10000), false);
    audit(result.run.audit, result.run.runs.size());
    info(fmt("within-run slopes at T = 1e4, eps = 0.01: suboptimality %.3f, violation %.3f",
             result.summary.slope_subopt_cumsum.value_or(NAN),
             result.summary.slope_violation_cumsum.value_or(NAN)));
    const auto delayed = rate_sweep(10);
    info(fmt("horizon sweep with tau = 10: suboptimality slope %.3f, violation slope %.3f", delayed.subopt,
             delayed.violation));
  }

  ComparisonResult cmp;
  bool compared = false;
  all &= report("AC4", 120, [&] {
    auto cfg = pricing_config();
    cmp = compare_modes(cfg, false);
    compared = true;
    audit(cmp.sync.audit, cmp.sync.runs.size());
    audit(cmp.async.audit, cmp.async.runs.size());
    return ac4(cmp);
  });
  all &= report("AC5", 0, [&] {
    if (!compared) return Outcome{false, "pricing comparison did not complete"};
    auto cfg = pricing_config();
    cfg.pricing.gamma_db = {4.0, 4.0};
    const auto high = run_experiment(cfg, false);
    audit(high.run.audit, high.run.runs.size());
    const double r_high = *high.summary.final_revenue;
    const double r_low = *cmp.async_summary.final_revenue;
    return Outcome{r_high >= 1.1 * r_low,
                   fmt("limiting revenue %.4g at 4 dB vs %.4g at -3 dB", r_high, r_low) +
                       fmt(" (+%.1f%%, need >= %.0f%%)", 100.0 * (r_high / r_low - 1.0), 10.0)};
  });
  all &= report("AC6", 0, [&] {
    if (!compared) return Outcome{false, "pricing comparison did not complete"};
    return ac6(cmp);
  });
  all &= report("AC7", 0, ac7);
  all &= report("AC9", 0, ac9);
  all &= report("AC8", 0, [] {
    return Outcome{g_audit.clean(), std::to_string(g_audited_runs) + " runs audited: " +
                                        std::to_string(g_audit.negative_duals) + " negative duals, " +
                                        std::to_string(g_audit.infeasible_iterates) + " infeasible iterates, " +
                                        std::to_string(g_audit.staleness_over_bound) + " staleness breaches, " +
                                        std::to_string(g_audit.nonmonotone_indices) + " index regressions"};
  });
  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
