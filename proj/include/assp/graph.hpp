#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace assp {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

/// Symmetric, connected agent network. Every undirected link is stored as
/// two directed edges so that each orientation can carry its own multiplier.
/// Immutable after construction.
class NetworkGraph {
 public:
  NetworkGraph() = default;

  std::size_t n_nodes() const { return adjacency_.size(); }
  /// Number of directed edges (M).
  std::size_t n_edges() const { return edges_.size(); }
  std::size_t diameter() const { return diameter_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  /// Neighbors of i in increasing order.
  const std::vector<NodeId>& neighbors(NodeId i) const { return adjacency_.at(i); }

  /// Index of directed edge (i, j), or npos when absent.
  std::size_t edge_index(NodeId i, NodeId j) const;
  bool has_edge(NodeId i, NodeId j) const { return edge_index(i, j) != npos; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  friend NetworkGraph build_graph(std::size_t, const std::vector<Edge>&);

  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  // adjacency_edge_[i][k] is the directed edge index of (i, adjacency_[i][k])
  std::vector<std::vector<std::size_t>> adjacency_edge_;
  std::size_t diameter_ = 0;
};

/// Builds a validated graph. Edges may be given in either orientation and
/// duplicates are merged; the result always contains both orientations.
/// Throws SelfLoop, InvalidNode or DisconnectedGraph.
NetworkGraph build_graph(std::size_t n_nodes, const std::vector<Edge>& edge_list);

/// n_i together with i itself, sorted.
std::vector<NodeId> closed_neighborhood(const NetworkGraph& g, NodeId i);

NetworkGraph ring_graph(std::size_t n_nodes);
NetworkGraph path_graph(std::size_t n_nodes);

}  // namespace assp
