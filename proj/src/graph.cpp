#include "tcg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcg/errors.hpp"
#include "tcg/io.hpp"
#include "tcg/union_find.hpp"

namespace tcg {

Edge make_edge(NodeId a, NodeId b) {
  if (a == b) throw InputError("self-loop on node " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

SpatialGraph::SpatialGraph(std::vector<Point> nodes, EdgeSet edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Point& p = nodes_[k];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0.0 || p.x > 1.0 || p.y < 0.0 ||
        p.y > 1.0) {
      throw InputError("node " + std::to_string(k) + " coordinate outside [0,1]");
    }
  }
  for (const Edge& e : edges_) {
    if (e.i >= e.j) throw InputError("edge not in canonical i<j form");
    if (e.j >= nodes_.size()) {
      throw InputError("edge references missing node " + std::to_string(e.j));
    }
  }
}

std::vector<std::size_t> SpatialGraph::degrees() const {
  std::vector<std::size_t> deg(nodes_.size(), 0);
  for (const Edge& e : edges_) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

std::vector<std::vector<NodeId>> SpatialGraph::adjacency() const {
  std::vector<std::vector<NodeId>> adj(nodes_.size());
  for (const Edge& e : edges_) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  return adj;
}

SpatialGraph SpatialGraph::with_edges(EdgeSet edges) const {
  return SpatialGraph(nodes_, std::move(edges));
}

bool is_tree(const SpatialGraph& g) {
  const std::size_t n = g.node_count();
  if (n <= 1) return g.edges().empty();
  if (g.edge_count() != n - 1) return false;
  // n-1 edges and no cycle implies connected.
  UnionFind uf(n);
  for (const Edge& e : g.edges()) {
    if (!uf.unite(e.i, e.j)) return false;
  }
  return true;
}

namespace {

void check_universe(const EdgeSet& edges, std::size_t node_count, const char* which) {
  for (const Edge& e : edges) {
    if (e.i >= e.j || e.j >= node_count) {
      throw InputError(std::string(which) + " edge (" + std::to_string(e.i) + "," +
                       std::to_string(e.j) + ") outside node universe of size " +
                       std::to_string(node_count));
    }
  }
}

}  // namespace

EdgeDelta edge_delta(const EdgeSet& unconstrained, const EdgeSet& constrained,
                     std::size_t node_count) {
  check_universe(unconstrained, node_count, "unconstrained");
  check_universe(constrained, node_count, "constrained");
  EdgeDelta d;
  std::set_difference(constrained.begin(), constrained.end(), unconstrained.begin(),
                      unconstrained.end(), std::inserter(d.added, d.added.end()));
  std::set_difference(unconstrained.begin(), unconstrained.end(), constrained.begin(),
                      constrained.end(), std::inserter(d.removed, d.removed.end()));
  return d;
}

EdgeDelta edge_delta(const SpatialGraph& unconstrained, const SpatialGraph& constrained) {
  if (unconstrained.node_count() != constrained.node_count()) {
    throw InputError("edge_delta: node universes differ (" +
                     std::to_string(unconstrained.node_count()) + " vs " +
                     std::to_string(constrained.node_count()) + ")");
  }
  return edge_delta(unconstrained.edges(), constrained.edges(), unconstrained.node_count());
}

nlohmann::json edges_to_json(const EdgeSet& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Edge& e : edges) arr.push_back({e.i, e.j});
  return arr;
}

nlohmann::ordered_json graph_to_json(const SpatialGraph& g) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    nlohmann::ordered_json node;
    node["id"] = k;
    node["x"] = g.nodes()[k].x;
    node["y"] = g.nodes()[k].y;
    nodes.push_back(std::move(node));
  }
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges()) edges.push_back({e.i, e.j});
  nlohmann::ordered_json out;
  out["nodes"] = std::move(nodes);
  out["edges"] = std::move(edges);
  return out;
}

namespace {

double read_coordinate(const nlohmann::json& node, const char* key, const std::string& field) {
  const std::string f = field + "." + key;
  if (!node.contains(key) || !node[key].is_number()) throw ParseError(f, "missing or not a number");
  const double v = node[key].get<double>();
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw ParseError(f, "coordinate " + node[key].dump() + " outside [0,1]");
  }
  return v;
}

}  // namespace

SpatialGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  if (!j.contains("nodes") || !j["nodes"].is_array()) throw ParseError("nodes", "missing array");
  if (!j.contains("edges") || !j["edges"].is_array()) throw ParseError("edges", "missing array");

  const auto& jn = j["nodes"];
  const std::size_t n = jn.size();
  std::vector<Point> nodes(n);
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::string field = "nodes[" + std::to_string(k) + "]";
    const auto& node = jn[k];
    if (!node.is_object()) throw ParseError(field, "expected an object");
    if (!node.contains("id") || !node["id"].is_number_unsigned()) {
      throw ParseError(field + ".id", "missing or not a non-negative integer");
    }
    const auto id = node["id"].get<std::uint64_t>();
    if (id >= n) throw ParseError(field + ".id", "ids must be contiguous from 0");
    if (seen[id]) throw ParseError(field + ".id", "duplicate id " + std::to_string(id));
    seen[id] = true;
    nodes[id] = Point{read_coordinate(node, "x", field), read_coordinate(node, "y", field)};
  }

  EdgeSet edges;
  const auto& je = j["edges"];
  for (std::size_t k = 0; k < je.size(); ++k) {
    const std::string field = "edges[" + std::to_string(k) + "]";
    const auto& e = je[k];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned()) {
      throw ParseError(field, "expected a pair of node ids");
    }
    const auto a = e[0].get<std::uint64_t>();
    const auto b = e[1].get<std::uint64_t>();
    if (a >= n || b >= n) {
      throw ParseError(field, "references missing node " + std::to_string(std::max(a, b)));
    }
    if (a == b) throw ParseError(field, "self-loop");
    if (!edges.insert(make_edge(static_cast<NodeId>(a), static_cast<NodeId>(b))).second) {
      throw ParseError(field, "duplicate edge");
    }
  }
  return SpatialGraph(std::move(nodes), std::move(edges));
}

SpatialGraph load_graph(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  try {
    return graph_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

void save_graph(const SpatialGraph& g, const std::filesystem::path& path) {
  write_text_file(path, dump_json(graph_to_json(g)));
}

}  // namespace tcg
