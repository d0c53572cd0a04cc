#include "assp/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "assp/error.hpp"

namespace assp {

std::size_t NetworkGraph::edge_index(NodeId i, NodeId j) const {
  if (i >= adjacency_.size()) return npos;
  const auto& nbrs = adjacency_[i];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), j);
  if (it == nbrs.end() || *it != j) return npos;
  return adjacency_edge_[i][static_cast<std::size_t>(it - nbrs.begin())];
}

namespace {

std::vector<std::size_t> bfs_distances(const std::vector<std::vector<NodeId>>& adj, NodeId src) {
  std::vector<std::size_t> dist(adj.size(), NetworkGraph::npos);
  std::deque<NodeId> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : adj[u]) {
      if (dist[v] == NetworkGraph::npos) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

NetworkGraph build_graph(std::size_t n_nodes, const std::vector<Edge>& edge_list) {
  if (n_nodes == 0) throw InvalidNode("graph needs at least one node");
  std::set<Edge> directed;
  for (const auto& [i, j] : edge_list) {
    if (i >= n_nodes || j >= n_nodes) {
      throw InvalidNode("edge (" + std::to_string(i) + "," + std::to_string(j) +
                        ") outside [0," + std::to_string(n_nodes) + ")");
    }
    if (i == j) throw SelfLoop("node " + std::to_string(i));
    directed.insert({i, j});
    directed.insert({j, i});
  }

  NetworkGraph g;
  g.edges_.assign(directed.begin(), directed.end());
  g.adjacency_.assign(n_nodes, {});
  g.adjacency_edge_.assign(n_nodes, {});
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const auto& [i, j] = g.edges_[e];
    g.adjacency_[i].push_back(j);
    g.adjacency_edge_[i].push_back(e);
  }

  std::size_t diameter = 0;
  for (NodeId s = 0; s < n_nodes; ++s) {
    auto dist = bfs_distances(g.adjacency_, s);
    for (NodeId v = 0; v < n_nodes; ++v) {
      if (dist[v] == NetworkGraph::npos) {
        throw DisconnectedGraph("node " + std::to_string(v) + " unreachable from node " +
                                std::to_string(s));
      }
      diameter = std::max(diameter, dist[v]);
    }
  }
  g.diameter_ = diameter;
  return g;
}

std::vector<NodeId> closed_neighborhood(const NetworkGraph& g, NodeId i) {
  if (i >= g.n_nodes()) throw InvalidNode("node " + std::to_string(i));
  std::vector<NodeId> out = g.neighbors(i);
  out.insert(std::lower_bound(out.begin(), out.end(), i), i);
  return out;
}

NetworkGraph ring_graph(std::size_t n_nodes) {
  std::vector<Edge> edges;
  if (n_nodes >= 2) {
    for (NodeId i = 0; i < n_nodes; ++i) edges.emplace_back(i, (i + 1) % n_nodes);
  }
  return build_graph(n_nodes, edges);
}

NetworkGraph path_graph(std::size_t n_nodes) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i + 1 < n_nodes; ++i) edges.emplace_back(i, i + 1);
  return build_graph(n_nodes, edges);
}

}  // namespace assp
