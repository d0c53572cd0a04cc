#include "assp/apps/consensus.hpp"

#include <cmath>
#include <numbers>

#include "assp/error.hpp"

namespace assp::apps {

void ConsensusRegressionConfig::validate() const {
  if (n_nodes == 0) throw InvalidConfig("consensus: n_nodes must be positive");
  if (p == 0) throw InvalidConfig("consensus: p must be positive");
  if (!(gamma >= 0.0)) throw InvalidConfig("consensus: gamma must be nonnegative");
  for (double g : edge_gamma) {
    if (!(g >= 0.0)) throw InvalidConfig("consensus: edge tolerances must be nonnegative");
  }
  if (!(box > 0.0) || !std::isfinite(box)) throw InvalidConfig("consensus: box must be finite");
  if (!(noise >= 0.0)) throw InvalidConfig("consensus: noise must be nonnegative");
  if (!weights.empty()) {
    if (weights.size() != n_nodes) throw InvalidConfig("consensus: one weight vector per node");
    for (const auto& w : weights) {
      if (static_cast<std::size_t>(w.size()) != p) {
        throw InvalidConfig("consensus: weight vectors must have length p");
      }
    }
  }
}

NetworkGraph consensus_graph(const ConsensusRegressionConfig& cfg) {
  try {
    return cfg.edges.empty() ? ring_graph(cfg.n_nodes) : build_graph(cfg.n_nodes, cfg.edges);
  } catch (const Error& e) {
    throw InvalidConfig(std::string("consensus graph: ") + e.what());
  }
}

std::vector<Vector> consensus_weights(const ConsensusRegressionConfig& cfg, std::uint64_t seed) {
  if (!cfg.weights.empty()) return cfg.weights;
  const auto p = static_cast<Eigen::Index>(cfg.p);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(cfg.n_nodes);
    Vector w = Vector::Constant(p, 0.5);
    w[0] += cfg.weight_radius * std::cos(angle);
    if (p > 1) w[1] += cfg.weight_radius * std::sin(angle);
    CounterRng rng(seed, Stream::app, i, 0);
    for (Eigen::Index k = 0; k < p; ++k) w[k] += 0.1 * rng.normal();
    out.push_back(std::move(w));
  }
  return out;
}

ProblemSpec build_consensus_problem(const ConsensusRegressionConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ProblemSpec spec;
  spec.name = "consensus_regression";
  spec.graph = consensus_graph(cfg);
  if (!cfg.edge_gamma.empty() && cfg.edge_gamma.size() != spec.graph.n_edges()) {
    throw InvalidConfig("consensus: edge_gamma needs one entry per directed edge");
  }
  const auto weights = consensus_weights(cfg, seed);
  const std::size_t n = cfg.n_nodes;
  spec.dims.assign(n, cfg.p);
  for (std::size_t i = 0; i < n; ++i) {
    spec.objectives.push_back(least_squares_objective());
    spec.samplers.push_back(regression_sampler(weights[i], cfg.noise));
    spec.domains.push_back(DomainSpec::box(cfg.p, -cfg.box, cfg.box));
  }
  spec.constraints.kind = ConstraintFamily::Kind::pairwise;
  for (std::size_t e = 0; e < spec.graph.n_edges(); ++e) {
    spec.constraints.pairwise.push_back(
        proximity_constraint(cfg.edge_gamma.empty() ? cfg.gamma : cfg.edge_gamma[e]));
  }
  if (cfg.shared_observations) spec.observation_streams.assign(n, 0);
  spec.validate();
  return spec;
}

}  // namespace assp::apps
