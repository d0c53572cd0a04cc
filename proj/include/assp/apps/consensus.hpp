#pragma once

#include <cstdint>
#include <vector>

#include "assp/graph.hpp"
#include "assp/problem.hpp"

namespace assp::apps {

/// Decentralized linear regression where neighbors' models must stay within
/// a proximity tolerance instead of agreeing exactly.
struct ConsensusRegressionConfig {
  std::size_t n_nodes = 5;
  /// Undirected links; empty means a ring over n_nodes.
  std::vector<Edge> edges;
  std::size_t p = 4;
  /// Ground-truth model per node; empty means generated from the build seed.
  std::vector<Vector> weights;
  /// Generated models sit on a circle of this radius around a common center,
  /// so adjacent nodes get similar but distinct targets.
  double weight_radius = 1.5;
  double noise = 0.5;
  /// Tolerance of every edge unless edge_gamma is given (one per directed
  /// edge, ordered like NetworkGraph::edges()).
  double gamma = 0.5;
  std::vector<double> edge_gamma;
  /// Domain [-box, box]^p.
  double box = 5.0;
  /// Every node draws from the same observation stream.
  bool shared_observations = false;

  void validate() const;
};

NetworkGraph consensus_graph(const ConsensusRegressionConfig& cfg);
std::vector<Vector> consensus_weights(const ConsensusRegressionConfig& cfg, std::uint64_t seed);

/// f^i = 1/2 (z^T x^i - y)^2 with y = w_i^T z + noise, h^{ij} = ||x^i - x^j||.
ProblemSpec build_consensus_problem(const ConsensusRegressionConfig& cfg, std::uint64_t seed);

}  // namespace assp::apps
