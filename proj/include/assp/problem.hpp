#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "assp/graph.hpp"
#include "assp/rng.hpp"

namespace assp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Observation = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Domain
// ---------------------------------------------------------------------------

/// Compact convex per-node decision set. A box is [lo, hi] coordinatewise; a
/// sum_interval additionally requires sum_min <= sum(x) <= sum_max, with
/// [lo, hi] acting as the enclosing box (lo = 0 gives nonnegativity).
struct DomainSpec {
  enum class Kind { box, sum_interval };

  Kind kind = Kind::box;
  Vector lo;
  Vector hi;
  double sum_min = 0.0;
  double sum_max = 0.0;

  static DomainSpec box(Vector lo, Vector hi);
  static DomainSpec box(std::size_t dim, double lo, double hi);
  static DomainSpec sum_interval(std::size_t dim, double sum_min, double sum_max, double lo,
                                 double hi);

  std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
  /// Throws InfeasibleDomain when the set is empty or unbounded.
  void validate() const;
  bool contains(const Vector& x, double tol = 1e-9) const;
  /// Midpoint of the box, shifted onto the sum interval when needed.
  Vector center() const;
};

/// Euclidean projection onto the domain.
Vector project(const DomainSpec& domain, const Vector& u);

// ---------------------------------------------------------------------------
// Objectives, samplers and constraints
// ---------------------------------------------------------------------------

struct NodeObjective {
  std::function<double(const Vector& x, const Observation& theta)> value;
  std::function<Vector(const Vector& x, const Observation& theta)> gradient;
};

using Sampler = std::function<Observation(CounterRng& rng)>;

/// h^{ij}(x^i, x^j, theta^i, theta^j) <= tolerance, one per directed edge.
struct PairwiseConstraint {
  using Value = std::function<double(const Vector&, const Vector&, const Observation&,
                                     const Observation&)>;
  using Gradient = std::function<Vector(const Vector&, const Vector&, const Observation&,
                                        const Observation&)>;
  Value value;
  Gradient grad_first;
  Gradient grad_second;
  double tolerance = 0.0;
};

/// Vector constraint h^i({x^j, theta^j}) <= 0 owned by node i. Participants
/// must lie in the closed neighborhood of the owner; arguments are passed in
/// participant order. `value` returns the slack (tolerances already folded
/// in); `jacobian(k, ...)` is d value / d x^{participants[k]} (count x dim).
struct NeighborhoodConstraint {
  using Value = std::function<Vector(const std::vector<Vector>&, const std::vector<Observation>&)>;
  using Jacobian = std::function<Matrix(std::size_t, const std::vector<Vector>&,
                                        const std::vector<Observation>&)>;
  std::vector<NodeId> participants;
  std::size_t count = 0;
  Value value;
  Jacobian jacobian;
};

struct ConstraintFamily {
  enum class Kind { pairwise, neighborhood };

  Kind kind = Kind::pairwise;
  std::vector<PairwiseConstraint> pairwise;          // indexed by directed edge
  std::vector<NeighborhoodConstraint> neighborhood;  // indexed by owner node

  /// Neighborhood family with no constraint rows.
  static ConstraintFamily none(std::size_t n_nodes);
};

// ---------------------------------------------------------------------------
// Problem
// ---------------------------------------------------------------------------

/// Constrained stochastic program
///   min sum_i E[f^i(x^i, theta^i)]  s.t. E[h] <= tolerance,  x^i in X_i.
/// Immutable once validated; evaluation functions are pure.
struct ProblemSpec {
  std::string name;
  NetworkGraph graph;
  std::vector<std::size_t> dims;
  std::vector<NodeObjective> objectives;
  std::vector<Sampler> samplers;
  ConstraintFamily constraints;
  std::vector<DomainSpec> domains;
  /// Optional starting point; projected onto the domain. Empty means center.
  std::vector<Vector> initial;
  /// Optional node -> observation stream map; empty gives every node its own
  /// stream. Nodes mapped to one stream see identical draws.
  std::vector<std::size_t> observation_streams;

  std::size_t n_nodes() const { return graph.n_nodes(); }
  std::size_t dim(NodeId i) const { return dims.at(i); }
  std::size_t n_duals() const;
  /// Start of node i's block in the dual vector (neighborhood form); the
  /// final entry equals n_duals().
  std::vector<std::size_t> dual_offsets() const;
  std::vector<Vector> initial_point() const;

  /// Throws InvalidConfig / DimensionMismatch / InfeasibleDomain.
  void validate() const;
};

/// Draws theta^node_t. Identical (seed, node, t) triples give identical draws.
Observation sample_observation(const ProblemSpec& spec, std::uint64_t seed, NodeId node, long t);

double objective_value(const ProblemSpec& spec, NodeId node, const Vector& x,
                       const Observation& theta);
Vector objective_grad(const ProblemSpec& spec, NodeId node, const Vector& x,
                      const Observation& theta);

/// Signed slack h^{ij} - gamma_ij of directed edge `edge`.
double constraint_value(const ProblemSpec& spec, std::size_t edge, const Vector& xi,
                        const Vector& xj, const Observation& thetai, const Observation& thetaj);

enum class Argument { first, second };
Vector constraint_grad(const ProblemSpec& spec, std::size_t edge, Argument which, const Vector& xi,
                       const Vector& xj, const Observation& thetai, const Observation& thetaj);

/// Re-encodes a pairwise family as per-node vector constraints whose j-th row
/// is h^{ij} - gamma_ij, rows ordered like the node's directed edges.
ProblemSpec to_neighborhood_form(const ProblemSpec& pairwise);

/// Sample-average estimate of F(x) = sum_i E[f^i(x^i, theta^i)] over a fixed
/// set of draws taken from the evaluation stream, independent of any run.
class MonteCarloObjective {
 public:
  MonteCarloObjective(const ProblemSpec& spec, std::size_t samples, std::uint64_t eval_seed);

  double operator()(const std::vector<Vector>& x) const;
  std::size_t samples() const { return samples_; }

 private:
  std::vector<NodeObjective> objectives_;
  std::vector<std::vector<Observation>> draws_;
  std::size_t samples_;
};

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

Sampler point_mass(Observation value);
/// `count` i.i.d. exponential entries with the given mean.
Sampler exponential_sampler(std::size_t count, double mean);
/// theta = (z, y) with z ~ N(0, I), y = w^T z + noise * N(0, 1).
Sampler regression_sampler(Vector weights, double noise);

/// f = 1/2 (z^T x - y)^2 with theta = (z, y).
NodeObjective least_squares_objective();
/// f = c^T x, independent of theta.
NodeObjective linear_objective(Vector c);
/// f = 1/2 ||x - theta||^2.
NodeObjective squared_distance_objective();
NodeObjective constant_objective(double value);

/// ||x^i - x^j|| <= gamma; subgradient 0 where x^i = x^j.
PairwiseConstraint proximity_constraint(double gamma);

}  // namespace assp
