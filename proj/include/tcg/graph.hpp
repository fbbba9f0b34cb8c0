#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "json.hpp"

namespace tcg {

using NodeId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Undirected edge, always stored with i < j.
struct Edge {
  NodeId i = 0;
  NodeId j = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Canonicalizes (a, b) into i < j. Throws InputError on a self-loop.
Edge make_edge(NodeId a, NodeId b);

using EdgeSet = std::set<Edge>;

// Undirected graph over nodes 0..n-1 with coordinates in [0,1]^2.
// Immutable after construction; the constructor enforces every invariant.
class SpatialGraph {
 public:
  SpatialGraph() = default;
  SpatialGraph(std::vector<Point> nodes, EdgeSet edges);

  const std::vector<Point>& nodes() const noexcept { return nodes_; }
  const EdgeSet& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::vector<std::size_t> degrees() const;
  std::vector<std::vector<NodeId>> adjacency() const;

  // Same nodes, different edge set.
  SpatialGraph with_edges(EdgeSet edges) const;

  friend bool operator==(const SpatialGraph&, const SpatialGraph&) = default;

 private:
  std::vector<Point> nodes_;
  EdgeSet edges_;
};

// Edges added (E+ = constrained - unconstrained) and removed
// (E- = unconstrained - constrained) by a projection.
struct EdgeDelta {
  EdgeSet added;
  EdgeSet removed;

  bool empty() const noexcept { return added.empty() && removed.empty(); }
  friend bool operator==(const EdgeDelta&, const EdgeDelta&) = default;
};

// True iff |E| = |V| - 1 and the graph is connected. Graphs with zero or one
// node are trees exactly when they have no edges.
bool is_tree(const SpatialGraph& g);

// Both sets must reference ids below node_count; throws InputError otherwise.
EdgeDelta edge_delta(const EdgeSet& unconstrained, const EdgeSet& constrained,
                     std::size_t node_count);
// Throws InputError when the two graphs do not share a node universe.
EdgeDelta edge_delta(const SpatialGraph& unconstrained, const SpatialGraph& constrained);

nlohmann::ordered_json graph_to_json(const SpatialGraph& g);
// Throws ParseError naming the offending field.
SpatialGraph graph_from_json(const nlohmann::json& j);

SpatialGraph load_graph(const std::filesystem::path& path);
void save_graph(const SpatialGraph& g, const std::filesystem::path& path);

nlohmann::json edges_to_json(const EdgeSet& edges);

}  // namespace tcg
