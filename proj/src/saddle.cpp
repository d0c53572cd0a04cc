#include "assp/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "assp/error.hpp"

namespace assp {

TraceAudit& TraceAudit::operator+=(const TraceAudit& other) {
  negative_duals += other.negative_duals;
  infeasible_iterates += other.infeasible_iterates;
  staleness_over_bound += other.staleness_over_bound;
  nonmonotone_indices += other.nonmonotone_indices;
  return *this;
}

void Hyperparams::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidHyperparams("epsilon must be positive");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw InvalidHyperparams("delta must be nonnegative");
  }
  const double contraction = 1.0 - epsilon * epsilon * delta;
  if (!(contraction > 0.0 && contraction <= 1.0)) {
    throw InvalidHyperparams("1 - eps^2 delta must lie in (0, 1]");
  }
  if (T < 0) throw InvalidHyperparams("T must be nonnegative");
  if (tau < 0) throw InvalidHyperparams("tau must be nonnegative");
}

// ---------------------------------------------------------------------------
// Lagrangian pieces
// ---------------------------------------------------------------------------

namespace {

bool is_pairwise(const ProblemSpec& spec) {
  return spec.constraints.kind == ConstraintFamily::Kind::pairwise;
}

// Arguments of node k's constraint block in participant order.
void gather_block(const NeighborhoodConstraint& block, const EvaluationPoint& at,
                  std::vector<Vector>& xs, std::vector<Observation>& thetas) {
  xs.clear();
  thetas.clear();
  for (NodeId j : block.participants) {
    xs.push_back(at.x[j]);
    thetas.push_back(at.theta[j]);
  }
}

void check_point(const ProblemSpec& spec, const EvaluationPoint& at) {
  if (at.x.size() != spec.n_nodes() || at.theta.size() != spec.n_nodes()) {
    throw DimensionMismatch("evaluation point must cover every node");
  }
}

}  // namespace

Vector constraint_slack(const ProblemSpec& spec, const EvaluationPoint& at) {
  check_point(spec, at);
  Vector slack(static_cast<Eigen::Index>(spec.n_duals()));
  if (is_pairwise(spec)) {
    const auto& edges = spec.graph.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [i, j] = edges[e];
      slack[static_cast<Eigen::Index>(e)] =
          constraint_value(spec, e, at.x[i], at.x[j], at.theta[i], at.theta[j]);
    }
    return slack;
  }
  const auto offsets = spec.dual_offsets();
  std::vector<Vector> xs;
  std::vector<Observation> thetas;
  for (NodeId k = 0; k < spec.n_nodes(); ++k) {
    const auto& block = spec.constraints.neighborhood[k];
    if (block.count == 0) continue;
    gather_block(block, at, xs, thetas);
    const Vector values = block.value(xs, thetas);
    if (static_cast<std::size_t>(values.size()) != block.count) {
      throw DimensionMismatch("constraint block of node " + std::to_string(k) +
                              " returned the wrong number of rows");
    }
    slack.segment(static_cast<Eigen::Index>(offsets[k]), values.size()) = values;
  }
  return slack;
}

std::vector<Vector> primal_gradient(const ProblemSpec& spec, const EvaluationPoint& at,
                                    const Vector& lambda) {
  check_point(spec, at);
  if (static_cast<std::size_t>(lambda.size()) != spec.n_duals()) {
    throw DimensionMismatch("dual vector length");
  }
  std::vector<Vector> grad(spec.n_nodes());
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    grad[i] = objective_grad(spec, i, at.x[i], at.theta[i]);
  }

  if (is_pairwise(spec)) {
    // Block k holds h^{kj} for j in n_k; it feeds x^k through the first
    // argument and each x^j through the second. Summed block by block.
    for (NodeId k = 0; k < spec.n_nodes(); ++k) {
      const auto& nbrs = spec.graph.neighbors(k);
      if (nbrs.empty()) continue;
      Vector own = Vector::Zero(static_cast<Eigen::Index>(spec.dim(k)));
      for (NodeId j : nbrs) {
        const std::size_t kj = spec.graph.edge_index(k, j);
        own += lambda[static_cast<Eigen::Index>(kj)] *
               constraint_grad(spec, kj, Argument::first, at.x[k], at.x[j], at.theta[k], at.theta[j]);
      }
      for (NodeId m : closed_neighborhood(spec.graph, k)) {
        if (m == k) {
          grad[k] += own;
          continue;
        }
        const std::size_t km = spec.graph.edge_index(k, m);
        grad[m] += lambda[static_cast<Eigen::Index>(km)] *
                   constraint_grad(spec, km, Argument::second, at.x[k], at.x[m], at.theta[k], at.theta[m]);
      }
    }
    return grad;
  }

  const auto offsets = spec.dual_offsets();
  std::vector<Vector> xs;
  std::vector<Observation> thetas;
  for (NodeId k = 0; k < spec.n_nodes(); ++k) {
    const auto& block = spec.constraints.neighborhood[k];
    if (block.count == 0) continue;
    gather_block(block, at, xs, thetas);
    const auto lam = lambda.segment(static_cast<Eigen::Index>(offsets[k]),
                                    static_cast<Eigen::Index>(block.count));
    for (std::size_t m = 0; m < block.participants.size(); ++m) {
      const NodeId i = block.participants[m];
      const Matrix jac = block.jacobian(m, xs, thetas);
      if (static_cast<std::size_t>(jac.rows()) != block.count ||
          static_cast<std::size_t>(jac.cols()) != spec.dim(i)) {
        throw DimensionMismatch("jacobian of block " + std::to_string(k) + " wrt node " +
                                std::to_string(i));
      }
      grad[i] += jac.transpose() * lam;
    }
  }
  return grad;
}

double stochastic_lagrangian(const ProblemSpec& spec, const EvaluationPoint& at,
                             const Vector& lambda, const Hyperparams& hp) {
  double value = 0.0;
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    value += objective_value(spec, i, at.x[i], at.theta[i]);
  }
  if (lambda.size() == 0) return value;
  const Vector slack = constraint_slack(spec, at);
  value += lambda.dot(slack);
  value -= 0.5 * hp.delta * hp.epsilon * lambda.squaredNorm();
  return value;
}

std::vector<Vector> primal_step(const ProblemSpec& spec, const SaddleState& state,
                                const EvaluationPoint& at, const Hyperparams& hp) {
  const auto grad = primal_gradient(spec, at, state.lambda);
  std::vector<Vector> next(spec.n_nodes());
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    next[i] = project(spec.domains[i], state.x[i] - hp.epsilon * grad[i]);
  }
  return next;
}

Vector dual_step(const Vector& lambda, const Vector& slack, const Hyperparams& hp) {
  if (lambda.size() != slack.size()) throw DimensionMismatch("dual and slack lengths differ");
  const double shrink = 1.0 - hp.epsilon * hp.epsilon * hp.delta;
  return (shrink * lambda + hp.epsilon * slack).cwiseMax(0.0);
}

Vector dual_step(const ProblemSpec& spec, const SaddleState& state, const EvaluationPoint& at,
                 const Hyperparams& hp) {
  return dual_step(state.lambda, constraint_slack(spec, at), hp);
}

EvaluationPoint gather_delayed(const ProblemSpec& spec, const StalenessBuffer& buffer,
                               const std::vector<long>& resolved, std::uint64_t seed) {
  EvaluationPoint at;
  at.x.reserve(spec.n_nodes());
  at.theta.reserve(spec.n_nodes());
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    at.x.push_back(buffer.fetch(resolved[i], i));
    at.theta.push_back(sample_observation(spec, seed, i, resolved[i]));
  }
  return at;
}

// ---------------------------------------------------------------------------
// Trace recording shared by the asynchronous engine and the synchronous path
// ---------------------------------------------------------------------------

namespace {

void record_row(const ProblemSpec& spec, std::uint64_t seed, int tau, const RunOptions& options,
                const SaddleState& state, std::vector<long> resolved, Vector delayed_slack,
                RunTrace& trace) {
  TraceRow row;
  row.t = state.t;
  row.lambda_norm = state.lambda.norm();

  EvaluationPoint now;
  now.x = state.x;
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    now.theta.push_back(sample_observation(spec, seed, i, state.t));
  }
  row.current_slack = constraint_slack(spec, now);
  if (options.evaluator != nullptr) row.f_hat = (*options.evaluator)(state.x);

  // Audit. resolved holds [t-1]_i for the step that produced x_t.
  auto& audit = trace.audit;
  if ((state.lambda.array() < 0.0).any()) ++audit.negative_duals;
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    if (!spec.domains[i].contains(state.x[i])) ++audit.infeasible_iterates;
  }
  if (!resolved.empty()) {
    const long step_time = state.t - 1;
    const auto* prev = trace.rows.empty() ? nullptr : &trace.rows.back().resolved;
    for (NodeId i = 0; i < resolved.size(); ++i) {
      const long gap = step_time - resolved[i];
      row.max_staleness = std::max(row.max_staleness, static_cast<int>(gap));
      if (gap > tau || gap < 0) ++audit.staleness_over_bound;
      if (prev != nullptr && !prev->empty() && resolved[i] < (*prev)[i]) {
        ++audit.nonmonotone_indices;
      }
    }
  }
  row.resolved = std::move(resolved);
  row.delayed_slack = std::move(delayed_slack);
  trace.rows.push_back(std::move(row));

  const std::size_t thin = std::max<std::size_t>(options.thin_every, 1);
  if (static_cast<std::size_t>(state.t) % thin == 0) {
    trace.snapshots.push_back({state.t, state.x, state.lambda});
  }
  if (options.on_row) options.on_row(state.t, now.x, now.theta, trace);
}

// Keeps the final state in the snapshot list even when thinning skips it.
void finish_snapshots(const SaddleState& state, RunTrace& trace) {
  if (trace.snapshots.empty() || trace.snapshots.back().t != state.t) {
    trace.snapshots.push_back({state.t, state.x, state.lambda});
  }
}

SaddleState initial_state(const ProblemSpec& spec) {
  SaddleState state;
  state.x = spec.initial_point();
  state.lambda = Vector::Zero(static_cast<Eigen::Index>(spec.n_duals()));
  state.t = 0;
  return state;
}

}  // namespace

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Engine::Engine(const ProblemSpec& spec, Hyperparams hp, DelaySchedule schedule,
               std::uint64_t seed, RunOptions options)
    : spec_(&spec),
      hp_(hp),
      schedule_(std::move(schedule)),
      seed_(seed),
      options_(std::move(options)),
      buffer_(spec.n_nodes(), std::max(schedule_.tau_max, 0)) {
  spec.validate();
  hp_.validate();
  schedule_.validate(spec.n_nodes());
  state_ = initial_state(spec);
  resolved_.assign(spec.n_nodes(), 0);
  for (NodeId i = 0; i < spec.n_nodes(); ++i) buffer_.record(0, i, state_.x[i]);
  trace_.seed = seed_;
  trace_.tau = schedule_.tau_max;
  record_row(spec, seed_, schedule_.tau_max, options_, state_, {}, {}, trace_);
}

void Engine::step() {
  const ProblemSpec& spec = *spec_;
  const long t = state_.t;
  std::vector<long> resolved(spec.n_nodes(), 0);
  if (t > 0) {
    for (NodeId i = 0; i < spec.n_nodes(); ++i) {
      resolved[i] = resolve(schedule_, t, i, resolved_[i]);
    }
  }
  const EvaluationPoint at = gather_delayed(spec, buffer_, resolved, seed_);
  Vector slack = constraint_slack(spec, at);

  SaddleState next;
  next.x = primal_step(spec, state_, at, hp_);
  next.lambda = dual_step(state_.lambda, slack, hp_);
  next.t = t + 1;
  state_ = std::move(next);
  resolved_ = resolved;

  for (NodeId i = 0; i < spec.n_nodes(); ++i) buffer_.record(state_.t, i, state_.x[i]);
  record_row(spec, seed_, schedule_.tau_max, options_, state_, std::move(resolved),
             std::move(slack), trace_);
}

RunTrace Engine::take_trace() {
  finish_snapshots(state_, trace_);
  return std::move(trace_);
}

void Engine::run(long steps) {
  for (long k = 0; k < steps; ++k) step();
}

RunTrace run(const ProblemSpec& spec, const Hyperparams& hp, const DelaySchedule& schedule,
             std::uint64_t seed, const RunOptions& options) {
  Engine engine(spec, hp, schedule, seed, options);
  engine.run(hp.T);
  return engine.take_trace();
}

RunTrace run_generalized(const ProblemSpec& spec, const Hyperparams& hp,
                         const DelaySchedule& schedule, std::uint64_t seed,
                         const RunOptions& options) {
  if (spec.constraints.kind != ConstraintFamily::Kind::neighborhood) {
    throw InvalidConfig("run_generalized needs a neighborhood constraint family");
  }
  return run(spec, hp, schedule, seed, options);
}

RunTrace run_synchronous(const ProblemSpec& spec, const Hyperparams& hp, std::uint64_t seed,
                         const RunOptions& options) {
  spec.validate();
  hp.validate();
  RunTrace trace;
  trace.seed = seed;
  trace.tau = 0;
  SaddleState state = initial_state(spec);
  record_row(spec, seed, 0, options, state, {}, {}, trace);

  for (long t = 0; t < hp.T; ++t) {
    EvaluationPoint at;
    at.x = state.x;
    for (NodeId i = 0; i < spec.n_nodes(); ++i) {
      at.theta.push_back(sample_observation(spec, seed, i, t));
    }
    Vector slack = constraint_slack(spec, at);
    SaddleState next;
    next.x = primal_step(spec, state, at, hp);
    next.lambda = dual_step(state.lambda, slack, hp);
    next.t = t + 1;
    state = std::move(next);
    record_row(spec, seed, 0, options, state, std::vector<long>(spec.n_nodes(), t),
               std::move(slack), trace);
  }
  finish_snapshots(state, trace);
  return trace;
}

}  // namespace assp
