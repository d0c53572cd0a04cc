#include "assp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "assp/error.hpp"

namespace assp {

namespace {

void check_dim(const Vector& v, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(v.size()) != expected) {
    throw DimensionMismatch(std::string(what) + ": got " + std::to_string(v.size()) +
                            ", expected " + std::to_string(expected));
  }
}

Vector clamp(const Vector& u, const Vector& lo, const Vector& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// DomainSpec
// ---------------------------------------------------------------------------

DomainSpec DomainSpec::box(Vector lo, Vector hi) {
  DomainSpec d;
  d.kind = Kind::box;
  d.lo = std::move(lo);
  d.hi = std::move(hi);
  d.validate();
  return d;
}

DomainSpec DomainSpec::box(std::size_t dim, double lo, double hi) {
  return box(Vector::Constant(static_cast<Eigen::Index>(dim), lo),
             Vector::Constant(static_cast<Eigen::Index>(dim), hi));
}

DomainSpec DomainSpec::sum_interval(std::size_t dim, double sum_min, double sum_max, double lo,
                                    double hi) {
  DomainSpec d;
  d.kind = Kind::sum_interval;
  d.lo = Vector::Constant(static_cast<Eigen::Index>(dim), lo);
  d.hi = Vector::Constant(static_cast<Eigen::Index>(dim), hi);
  d.sum_min = sum_min;
  d.sum_max = sum_max;
  d.validate();
  return d;
}

void DomainSpec::validate() const {
  if (lo.size() != hi.size()) throw DimensionMismatch("domain bounds differ in length");
  if (lo.size() == 0) throw InfeasibleDomain("zero-dimensional domain");
  for (Eigen::Index k = 0; k < lo.size(); ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k])) {
      throw InfeasibleDomain("bounds must be finite");
    }
    if (lo[k] > hi[k]) throw InfeasibleDomain("lo > hi at coordinate " + std::to_string(k));
  }
  if (kind == Kind::sum_interval) {
    if (!(sum_min <= sum_max)) throw InfeasibleDomain("sum_min > sum_max");
    if (lo.sum() > sum_max || hi.sum() < sum_min) {
      throw InfeasibleDomain("sum interval does not meet the enclosing box");
    }
  }
}

bool DomainSpec::contains(const Vector& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!(x[k] >= lo[k] - tol && x[k] <= hi[k] + tol)) return false;
  }
  if (kind == Kind::sum_interval) {
    const double s = x.sum();
    if (s < sum_min - tol || s > sum_max + tol) return false;
  }
  return true;
}

Vector DomainSpec::center() const { return project(*this, 0.5 * (lo + hi)); }

Vector project(const DomainSpec& domain, const Vector& u) {
  check_dim(u, domain.dim(), "project");
  Vector y = clamp(u, domain.lo, domain.hi);
  if (domain.kind == DomainSpec::Kind::box) return y;

  const double s = y.sum();
  double target;
  if (s < domain.sum_min) {
    target = domain.sum_min;
  } else if (s > domain.sum_max) {
    target = domain.sum_max;
  } else {
    return y;
  }
  if (domain.lo.sum() > domain.sum_max || domain.hi.sum() < domain.sum_min) {
    throw InfeasibleDomain("sum interval does not meet the enclosing box");
  }

  // KKT: y = clamp(u - nu), with phi(nu) = sum(clamp(u - nu)) = target.
  // phi is piecewise linear and nonincreasing with kinks at u - hi, u - lo.
  const auto n = u.size();
  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index k = 0; k < n; ++k) {
    breaks.push_back(u[k] - domain.hi[k]);
    breaks.push_back(u[k] - domain.lo[k]);
  }
  std::sort(breaks.begin(), breaks.end());
  auto phi = [&](double nu) {
    return clamp(u - Vector::Constant(n, nu), domain.lo, domain.hi).sum();
  };

  double nu = breaks.back();
  double prev_nu = breaks.front();
  double prev_phi = phi(prev_nu);
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    const double cur_nu = breaks[k];
    const double cur_phi = phi(cur_nu);
    if (cur_phi <= target) {
      nu = prev_phi == cur_phi
               ? prev_nu
               : prev_nu + (prev_phi - target) / (prev_phi - cur_phi) * (cur_nu - prev_nu);
      break;
    }
    prev_nu = cur_nu;
    prev_phi = cur_phi;
  }
  return clamp(u - Vector::Constant(n, nu), domain.lo, domain.hi);
}

// ---------------------------------------------------------------------------
// ConstraintFamily / ProblemSpec
// ---------------------------------------------------------------------------

ConstraintFamily ConstraintFamily::none(std::size_t n_nodes) {
  ConstraintFamily family;
  family.kind = Kind::neighborhood;
  family.neighborhood.resize(n_nodes);
  return family;
}

std::size_t ProblemSpec::n_duals() const {
  if (constraints.kind == ConstraintFamily::Kind::pairwise) return graph.n_edges();
  std::size_t total = 0;
  for (const auto& block : constraints.neighborhood) total += block.count;
  return total;
}

std::vector<std::size_t> ProblemSpec::dual_offsets() const {
  std::vector<std::size_t> offsets{0};
  if (constraints.kind == ConstraintFamily::Kind::pairwise) {
    for (NodeId i = 0; i < n_nodes(); ++i) {
      offsets.push_back(offsets.back() + graph.neighbors(i).size());
    }
  } else {
    for (const auto& block : constraints.neighborhood) {
      offsets.push_back(offsets.back() + block.count);
    }
  }
  return offsets;
}

std::vector<Vector> ProblemSpec::initial_point() const {
  std::vector<Vector> x(n_nodes());
  for (NodeId i = 0; i < n_nodes(); ++i) {
    x[i] = initial.empty() ? domains[i].center() : project(domains[i], initial[i]);
  }
  return x;
}

void ProblemSpec::validate() const {
  const std::size_t n = n_nodes();
  if (n == 0) throw InvalidConfig("problem has no nodes");
  if (dims.size() != n || objectives.size() != n || samplers.size() != n ||
      domains.size() != n) {
    throw InvalidConfig("every node needs a dimension, objective, sampler and domain");
  }
  for (NodeId i = 0; i < n; ++i) {
    if (!objectives[i].value || !objectives[i].gradient) {
      throw InvalidConfig("node " + std::to_string(i) + " has no objective");
    }
    if (!samplers[i]) throw InvalidConfig("node " + std::to_string(i) + " has no sampler");
    if (dims[i] == 0) throw InvalidConfig("node " + std::to_string(i) + " has dimension 0");
    if (domains[i].dim() != dims[i]) {
      throw DimensionMismatch("domain of node " + std::to_string(i));
    }
    domains[i].validate();
  }
  if (!initial.empty()) {
    if (initial.size() != n) throw InvalidConfig("initial point must cover every node");
    for (NodeId i = 0; i < n; ++i) check_dim(initial[i], dims[i], "initial point");
  }

  if (!observation_streams.empty() && observation_streams.size() != n) {
    throw InvalidConfig("observation stream map must cover every node");
  }

  if (constraints.kind == ConstraintFamily::Kind::pairwise) {
    if (constraints.pairwise.size() != graph.n_edges()) {
      throw InvalidConfig("pairwise family needs one constraint per directed edge");
    }
    for (const auto& c : constraints.pairwise) {
      if (!c.value || !c.grad_first || !c.grad_second) {
        throw InvalidConfig("pairwise constraint missing value or gradient");
      }
      if (!(c.tolerance >= 0.0)) throw InvalidConfig("tolerance must be nonnegative");
    }
  } else {
    if (constraints.neighborhood.size() != n) {
      throw InvalidConfig("neighborhood family needs one block per node");
    }
    for (NodeId i = 0; i < n; ++i) {
      const auto& block = constraints.neighborhood[i];
      if (block.count == 0) continue;
      if (!block.value || !block.jacobian) {
        throw InvalidConfig("constraint block of node " + std::to_string(i) + " incomplete");
      }
      if (block.participants.empty()) {
        throw InvalidConfig("constraint block of node " + std::to_string(i) +
                            " has no participants");
      }
      const auto closed = closed_neighborhood(graph, i);
      for (NodeId j : block.participants) {
        if (!std::binary_search(closed.begin(), closed.end(), j)) {
          throw InvalidConfig("node " + std::to_string(j) + " is not in the closed neighborhood of " +
                              std::to_string(i));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Observation sample_observation(const ProblemSpec& spec, std::uint64_t seed, NodeId node, long t) {
  const std::size_t stream =
      spec.observation_streams.empty() ? node : spec.observation_streams.at(node);
  CounterRng rng(seed, Stream::observation, stream, static_cast<std::uint64_t>(t));
  return spec.samplers.at(node)(rng);
}

double objective_value(const ProblemSpec& spec, NodeId node, const Vector& x,
                       const Observation& theta) {
  check_dim(x, spec.dim(node), "objective_value");
  return spec.objectives[node].value(x, theta);
}

Vector objective_grad(const ProblemSpec& spec, NodeId node, const Vector& x,
                      const Observation& theta) {
  check_dim(x, spec.dim(node), "objective_grad");
  return spec.objectives[node].gradient(x, theta);
}

double constraint_value(const ProblemSpec& spec, std::size_t edge, const Vector& xi,
                        const Vector& xj, const Observation& thetai, const Observation& thetaj) {
  if (spec.constraints.kind != ConstraintFamily::Kind::pairwise) {
    throw InvalidConfig("constraint_value needs a pairwise family");
  }
  const auto& [i, j] = spec.graph.edge(edge);
  check_dim(xi, spec.dim(i), "constraint_value first argument");
  check_dim(xj, spec.dim(j), "constraint_value second argument");
  const auto& c = spec.constraints.pairwise[edge];
  return c.value(xi, xj, thetai, thetaj) - c.tolerance;
}

Vector constraint_grad(const ProblemSpec& spec, std::size_t edge, Argument which, const Vector& xi,
                       const Vector& xj, const Observation& thetai, const Observation& thetaj) {
  if (spec.constraints.kind != ConstraintFamily::Kind::pairwise) {
    throw InvalidConfig("constraint_grad needs a pairwise family");
  }
  const auto& [i, j] = spec.graph.edge(edge);
  check_dim(xi, spec.dim(i), "constraint_grad first argument");
  check_dim(xj, spec.dim(j), "constraint_grad second argument");
  const auto& c = spec.constraints.pairwise[edge];
  return which == Argument::first ? c.grad_first(xi, xj, thetai, thetaj)
                                  : c.grad_second(xi, xj, thetai, thetaj);
}

ProblemSpec to_neighborhood_form(const ProblemSpec& pairwise) {
  if (pairwise.constraints.kind != ConstraintFamily::Kind::pairwise) {
    throw InvalidConfig("to_neighborhood_form expects a pairwise family");
  }
  ProblemSpec out = pairwise;
  out.constraints = ConstraintFamily{};
  out.constraints.kind = ConstraintFamily::Kind::neighborhood;
  out.constraints.neighborhood.resize(pairwise.n_nodes());

  for (NodeId i = 0; i < pairwise.n_nodes(); ++i) {
    const auto participants = closed_neighborhood(pairwise.graph, i);
    const auto self = static_cast<std::size_t>(
        std::find(participants.begin(), participants.end(), i) - participants.begin());
    // rows[k] = (position of neighbor in participants, directed edge index)
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (NodeId j : pairwise.graph.neighbors(i)) {
      const auto pos = static_cast<std::size_t>(
          std::find(participants.begin(), participants.end(), j) - participants.begin());
      rows.emplace_back(pos, pairwise.graph.edge_index(i, j));
    }
    auto constraints = pairwise.constraints.pairwise;

    auto& block = out.constraints.neighborhood[i];
    block.participants = participants;
    block.count = rows.size();
    if (rows.empty()) continue;
    block.value = [rows, constraints, self](const std::vector<Vector>& xs,
                                            const std::vector<Observation>& thetas) {
      Vector slack(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& [pos, e] = rows[k];
        const auto& c = constraints[e];
        slack[static_cast<Eigen::Index>(k)] =
            c.value(xs[self], xs[pos], thetas[self], thetas[pos]) - c.tolerance;
      }
      return slack;
    };
    std::vector<std::size_t> dims_by_pos;
    for (NodeId j : participants) dims_by_pos.push_back(pairwise.dim(j));
    block.jacobian = [rows, constraints, self, dims_by_pos](
                         std::size_t which, const std::vector<Vector>& xs,
                         const std::vector<Observation>& thetas) {
      Matrix jac = Matrix::Zero(static_cast<Eigen::Index>(rows.size()),
                                static_cast<Eigen::Index>(dims_by_pos[which]));
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& [pos, e] = rows[k];
        const auto& c = constraints[e];
        const auto r = static_cast<Eigen::Index>(k);
        if (which == self) {
          jac.row(r) = c.grad_first(xs[self], xs[pos], thetas[self], thetas[pos]).transpose();
        } else if (which == pos) {
          jac.row(r) = c.grad_second(xs[self], xs[pos], thetas[self], thetas[pos]).transpose();
        }
      }
      return jac;
    };
  }
  out.validate();
  return out;
}

MonteCarloObjective::MonteCarloObjective(const ProblemSpec& spec, std::size_t samples,
                                         std::uint64_t eval_seed)
    : objectives_(spec.objectives), draws_(spec.n_nodes()), samples_(samples) {
  if (samples == 0) throw InvalidConfig("Monte Carlo evaluation needs at least one sample");
  for (NodeId i = 0; i < spec.n_nodes(); ++i) {
    draws_[i].reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      CounterRng rng(eval_seed, Stream::evaluation, i, s);
      draws_[i].push_back(spec.samplers[i](rng));
    }
  }
}

double MonteCarloObjective::operator()(const std::vector<Vector>& x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < draws_.size(); ++i) {
    double acc = 0.0;
    for (const auto& theta : draws_[i]) acc += objectives_[i].value(x[i], theta);
    total += acc / static_cast<double>(samples_);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

Sampler point_mass(Observation value) {
  return [value = std::move(value)](CounterRng&) { return value; };
}

Sampler exponential_sampler(std::size_t count, double mean) {
  return [count, mean](CounterRng& rng) {
    Observation theta(static_cast<Eigen::Index>(count));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = rng.exponential(mean);
    return theta;
  };
}

Sampler regression_sampler(Vector weights, double noise) {
  return [w = std::move(weights), noise](CounterRng& rng) {
    const auto p = w.size();
    Observation theta(p + 1);
    for (Eigen::Index k = 0; k < p; ++k) theta[k] = rng.normal();
    theta[p] = theta.head(p).dot(w) + noise * rng.normal();
    return theta;
  };
}

NodeObjective least_squares_objective() {
  NodeObjective f;
  f.value = [](const Vector& x, const Observation& theta) {
    const auto p = x.size();
    const double r = theta.head(p).dot(x) - theta[p];
    return 0.5 * r * r;
  };
  f.gradient = [](const Vector& x, const Observation& theta) {
    const auto p = x.size();
    const double r = theta.head(p).dot(x) - theta[p];
    return Vector(r * theta.head(p));
  };
  return f;
}

NodeObjective linear_objective(Vector c) {
  NodeObjective f;
  f.value = [c](const Vector& x, const Observation&) { return c.dot(x); };
  f.gradient = [c](const Vector&, const Observation&) { return c; };
  return f;
}

NodeObjective squared_distance_objective() {
  NodeObjective f;
  f.value = [](const Vector& x, const Observation& theta) {
    return 0.5 * (x - theta).squaredNorm();
  };
  f.gradient = [](const Vector& x, const Observation& theta) { return Vector(x - theta); };
  return f;
}

NodeObjective constant_objective(double value) {
  NodeObjective f;
  f.value = [value](const Vector&, const Observation&) { return value; };
  f.gradient = [](const Vector& x, const Observation&) { return Vector(Vector::Zero(x.size())); };
  return f;
}

PairwiseConstraint proximity_constraint(double gamma) {
  PairwiseConstraint c;
  c.tolerance = gamma;
  c.value = [](const Vector& xi, const Vector& xj, const Observation&, const Observation&) {
    return (xi - xj).norm();
  };
  c.grad_first = [](const Vector& xi, const Vector& xj, const Observation&, const Observation&) {
    const Vector d = xi - xj;
    const double n = d.norm();
    return n > 0.0 ? Vector(d / n) : Vector(Vector::Zero(d.size()));
  };
  c.grad_second = [](const Vector& xi, const Vector& xj, const Observation&, const Observation&) {
    const Vector d = xj - xi;
    const double n = d.norm();
    return n > 0.0 ? Vector(d / n) : Vector(Vector::Zero(d.size()));
  };
  return c;
}

}  // namespace assp
