#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "radionet/errors.hpp"

namespace radionet {

// ceil(log2(x)) clamped to at least 1; every protocol formula uses this.
constexpr std::int64_t clog2(double x) noexcept {
  std::int64_t k = 0;
  double p = 1.0;
  while (p < x) {
    p *= 2.0;
    ++k;
  }
  return k < 1 ? 1 : k;
}

constexpr std::int64_t clog2(std::uint64_t x) noexcept { return clog2(static_cast<double>(x)); }

using Edge = std::pair<NodeId, NodeId>;

inline constexpr std::int64_t kUnreachable = -1;

// Hop distances from src; kUnreachable for nodes in other components.
inline std::vector<std::int64_t> bfs_distances(const std::vector<std::vector<NodeId>>& adj,
                                               NodeId src) {
  std::vector<std::int64_t> dist(adj.size(), kUnreachable);
  std::deque<NodeId> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : adj[u]) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

// Exact diameter by all-pairs BFS. Throws InputError on disconnected input.
inline std::int64_t diameter(const std::vector<std::vector<NodeId>>& adj) {
  if (adj.empty()) throw InputError("diameter of an empty graph");
  std::int64_t best = 0;
  for (NodeId s = 0; s < adj.size(); ++s) {
    auto dist = bfs_distances(adj, s);
    for (auto d : dist) {
      if (d == kUnreachable) throw InputError("graph is disconnected");
      best = std::max(best, d);
    }
  }
  return best;
}

// Connected, undirected, loop-free topology. Immutable after construction.
class RadioGraph {
 public:
  RadioGraph() = default;

  RadioGraph(std::size_t n, const std::vector<Edge>& edges) : adj_(n) {
    if (n == 0) throw InputError("graph must have at least one node");
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) {
        throw InputError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a node outside 0.." + std::to_string(n - 1));
      }
      if (u == v) throw InputError("self-loop at node " + std::to_string(u));
      adj_[u].push_back(v);
      adj_[v].push_back(u);
    }
    for (auto& nbrs : adj_) {
      std::sort(nbrs.begin(), nbrs.end());
      nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
      edge_count_ += nbrs.size();
    }
    edge_count_ /= 2;
    diameter_ = radionet::diameter(adj_);
  }

  std::size_t node_count() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::int64_t diameter() const noexcept { return diameter_; }

  const std::vector<NodeId>& neighbors(NodeId v) const { return adj_.at(v); }
  const std::vector<std::vector<NodeId>>& adjacency() const noexcept { return adj_; }

  bool adjacent(NodeId u, NodeId v) const {
    const auto& nbrs = adj_.at(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
  }

  bool contains(NodeId v) const noexcept { return v < adj_.size(); }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < adj_.size(); ++u) {
      for (NodeId v : adj_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  std::int64_t eccentricity(NodeId v) const {
    auto dist = bfs_distances(adj_, v);
    return *std::max_element(dist.begin(), dist.end());
  }

  std::int64_t log_n() const noexcept { return clog2(static_cast<std::uint64_t>(node_count())); }

  friend bool operator==(const RadioGraph& a, const RadioGraph& b) { return a.adj_ == b.adj_; }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::size_t edge_count_ = 0;
  std::int64_t diameter_ = 0;
};

// Text format: "n m" then m lines "u v"; blank lines and '#' comments skipped.
inline RadioGraph read_graph(std::istream& in) {
  std::string line;
  bool have_header = false;
  std::size_t n = 0, m = 0;
  std::vector<Edge> edges;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    long long a = -1, b = -1;
    if (!(ss >> a >> b) || a < 0 || b < 0) {
      throw InputError("graph file line " + std::to_string(lineno) + ": expected two non-negative integers");
    }
    std::string rest;
    if (ss >> rest) throw InputError("graph file line " + std::to_string(lineno) + ": trailing tokens");
    if (!have_header) {
      n = static_cast<std::size_t>(a);
      m = static_cast<std::size_t>(b);
      have_header = true;
      edges.reserve(m);
    } else {
      edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    }
  }
  if (!have_header) throw InputError("graph file is empty");
  if (edges.size() != m) {
    throw InputError("graph file declares " + std::to_string(m) + " edges but lists " +
                     std::to_string(edges.size()));
  }
  return RadioGraph(n, edges);
}

inline RadioGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file " + path);
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const RadioGraph& g) {
  auto edges = g.edges();
  out << g.node_count() << ' ' << edges.size() << '\n';
  for (auto [u, v] : edges) out << u << ' ' << v << '\n';
}

}  // namespace radionet
