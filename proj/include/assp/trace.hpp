#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "assp/problem.hpp"

namespace assp {

/// Counts of invariant violations observed while a run was recorded.
struct TraceAudit {
  std::size_t negative_duals = 0;
  std::size_t infeasible_iterates = 0;
  std::size_t staleness_over_bound = 0;
  std::size_t nonmonotone_indices = 0;

  bool clean() const {
    return negative_duals == 0 && infeasible_iterates == 0 && staleness_over_bound == 0 &&
           nonmonotone_indices == 0;
  }
  TraceAudit& operator+=(const TraceAudit& other);
};

/// Row t describes the state (x_t, lambda_t) and the step that produced it,
/// i.e. the update taken at time t-1 with delayed indices [t-1]_i. Row 0 is
/// the initial state and carries no step data.
struct TraceRow {
  long t = 0;
  /// Monte Carlo estimate of F(x_t); NaN when no evaluator was attached.
  double f_hat = std::numeric_limits<double>::quiet_NaN();
  double lambda_norm = 0.0;
  int max_staleness = 0;
  std::vector<long> resolved;
  /// h - gamma at the delayed arguments used by the producing step.
  Vector delayed_slack;
  /// h - gamma at (x_t, theta_t).
  Vector current_slack;
};

struct Snapshot {
  long t = 0;
  std::vector<Vector> x;
  Vector lambda;
};

struct RunTrace {
  std::uint64_t seed = 0;
  int tau = 0;
  std::vector<TraceRow> rows;
  /// Primal/dual snapshots every `thin_every` rows (always including the last).
  std::vector<Snapshot> snapshots;
  /// Per-row scalar series recorded by application hooks.
  std::map<std::string, std::vector<double>> extras;
  TraceAudit audit;

  long horizon() const { return static_cast<long>(rows.size()) - 1; }
};

}  // namespace assp
