#pragma once

#include <cstdint>
#include <vector>

#include "assp/advisor.hpp"
#include "assp/problem.hpp"
#include "assp/saddle.hpp"
#include "assp/trace.hpp"

namespace assp {

/// (t, value) pairs.
struct Series {
  std::vector<long> t;
  std::vector<double> value;

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  double back() const { return value.back(); }
};

struct OptimumEstimate {
  double f_star = 0.0;
  std::vector<Vector> x_ref;
};

/// Runs the synchronous method for `budget` iterations and evaluates the
/// running-average iterate (1/T) sum_{t=1..T} x_t with `evaluator`. A zero
/// budget evaluates the initial point.
OptimumEstimate estimate_optimum(const ProblemSpec& spec, const Hyperparams& hp, long budget,
                                 std::uint64_t seed, const MonteCarloObjective& evaluator);

/// s_t = (1/t) sum_{u=1..t} (F_hat(x_u) - F*), t = 1..T.
Series running_suboptimality(const RunTrace& trace, double f_star);
/// sum_{u=1..t} (F_hat(x_u) - F*), t = 1..T.
Series cumulative_suboptimality(const RunTrace& trace, double f_star);

struct ViolationSeries {
  /// v^k_t = [sum_{u=1..t} delayed slack^k_u]_+ for every dual k.
  std::vector<Series> per_dual;
  /// sum_k v^k_t.
  Series aggregate;
};
ViolationSeries delayed_violation(const RunTrace& trace);

/// Same clipped prefix sums built from the current-iterate slacks h(x_t, theta_t).
ViolationSeries current_violation(const RunTrace& trace);

/// Least-squares slope of log(value) against log(t) after discarding the
/// first `burn_in` fraction of the points. Nonpositive values are skipped;
/// throws DegenerateSeries when fewer than 10 points remain.
double fit_rate(const Series& series, double burn_in = 0.2);

/// Pointwise mean of equally indexed series.
Series average_series(const std::vector<Series>& runs);

/// Monte Carlo maxima over a fixed set of feasible points and `n_samples`
/// observations per point. Points do not depend on `seed`.
AssumptionEstimates audit_assumptions(const ProblemSpec& spec, std::size_t n_samples,
                                      std::uint64_t seed);

}  // namespace assp
