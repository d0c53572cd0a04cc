#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "assp/delay.hpp"
#include "assp/problem.hpp"
#include "assp/trace.hpp"

namespace assp {

struct Hyperparams {
  double epsilon = 0.01;
  double delta = 1e-5;
  long T = 1000;
  int tau = 0;

  /// Throws InvalidHyperparams unless epsilon > 0, delta >= 0 and
  /// 1 - epsilon^2 delta lies in (0, 1].
  void validate() const;
};

/// Primal block x = (x^1..x^N) and nonnegative duals. Pairwise duals are
/// ordered like the graph's directed edges; neighborhood duals are the
/// per-node blocks laid out by ProblemSpec::dual_offsets().
struct SaddleState {
  std::vector<Vector> x;
  Vector lambda;
  long t = 0;
};

/// Arguments at which one iteration evaluates gradients: per node the
/// (possibly stale) iterate x^i_{[t]_i} and observation theta^i_{[t]_i}.
struct EvaluationPoint {
  std::vector<Vector> x;
  std::vector<Observation> theta;
};

/// Sum_i [ f^i + sum_j lambda^{ij}(h^{ij} - gamma) - (delta eps / 2)(lambda^{ij})^2 ].
double stochastic_lagrangian(const ProblemSpec& spec, const EvaluationPoint& at,
                             const Vector& lambda, const Hyperparams& hp);

/// Per-dual slack h - gamma evaluated at `at`.
Vector constraint_slack(const ProblemSpec& spec, const EvaluationPoint& at);

/// Gradient of the stochastic Lagrangian with respect to each x^i.
std::vector<Vector> primal_gradient(const ProblemSpec& spec, const EvaluationPoint& at,
                                    const Vector& lambda);

/// x^i_{t+1} = P_X[x^i_t - eps * grad_i], gradient taken at `at` with lambda_t.
std::vector<Vector> primal_step(const ProblemSpec& spec, const SaddleState& state,
                                const EvaluationPoint& at, const Hyperparams& hp);

/// lambda_{t+1} = [(1 - eps^2 delta) lambda_t + eps * slack]_+.
Vector dual_step(const Vector& lambda, const Vector& slack, const Hyperparams& hp);
Vector dual_step(const ProblemSpec& spec, const SaddleState& state, const EvaluationPoint& at,
                 const Hyperparams& hp);

/// Collects the stale arguments x^i_{[t]_i}, theta^i_{[t]_i}.
EvaluationPoint gather_delayed(const ProblemSpec& spec, const StalenessBuffer& buffer,
                               const std::vector<long>& resolved, std::uint64_t seed);

class MonteCarloObjective;

using RowHook = std::function<void(long t, const std::vector<Vector>& x,
                                   const std::vector<Observation>& theta, RunTrace& trace)>;

struct RunOptions {
  std::size_t thin_every = 1;
  /// When set, every row records F_hat(x_t). Not owned.
  const MonteCarloObjective* evaluator = nullptr;
  /// Called for every row with the current iterate and current observations.
  RowHook on_row;
};

/// Asynchronous stochastic saddle-point iteration over a modeled delay
/// process. A single deterministic loop advances the global clock and
/// evaluates every gradient at the resolved stale indices; both primal and
/// dual updates read the time-t state and commit together.
///
/// The engine keeps a pointer to `spec`, which must outlive it.
class Engine {
 public:
  Engine(const ProblemSpec& spec, Hyperparams hp, DelaySchedule schedule, std::uint64_t seed,
         RunOptions options = {});

  void step();
  void run(long steps);

  const SaddleState& state() const { return state_; }
  const RunTrace& trace() const { return trace_; }
  /// Moves the trace out, appending the final state to the snapshots.
  RunTrace take_trace();

 private:
  const ProblemSpec* spec_;
  Hyperparams hp_;
  DelaySchedule schedule_;
  std::uint64_t seed_;
  RunOptions options_;
  SaddleState state_;
  StalenessBuffer buffer_;
  std::vector<long> resolved_;
  RunTrace trace_;
};

/// Runs hp.T iterations of the asynchronous method.
RunTrace run(const ProblemSpec& spec, const Hyperparams& hp, const DelaySchedule& schedule,
             std::uint64_t seed, const RunOptions& options = {});

/// Same as run() but requires a neighborhood constraint family.
RunTrace run_generalized(const ProblemSpec& spec, const Hyperparams& hp,
                         const DelaySchedule& schedule, std::uint64_t seed,
                         const RunOptions& options = {});

/// Reference synchronous method: every step uses the current iterate and
/// current observations directly, without any delay bookkeeping.
RunTrace run_synchronous(const ProblemSpec& spec, const Hyperparams& hp, std::uint64_t seed,
                         const RunOptions& options = {});

}  // namespace assp
