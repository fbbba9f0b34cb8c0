#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "tcg/graph.hpp"
#include "tcg/mst.hpp"
#include "tcg/pairs.hpp"

namespace testing {

using tcg::Edge;
using tcg::EdgeSet;
using tcg::NodeId;
using tcg::Point;
using tcg::SpatialGraph;

inline std::vector<Point> random_points(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

// Random labelled tree: each node attaches to an earlier one.
inline EdgeSet random_tree_edges(std::size_t n, std::mt19937_64& rng) {
  EdgeSet e;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    e.insert(tcg::make_edge(static_cast<NodeId>(parent(rng)), static_cast<NodeId>(v)));
  }
  return e;
}

inline EdgeSet random_edges(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution keep(p);
  EdgeSet e;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (keep(rng)) e.insert({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  }
  return e;
}

// Connected components by BFS, independent of the library's union-find.
inline std::size_t bfs_components(std::size_t n, const EdgeSet& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Edge& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<bool> seen(n, false);
  std::size_t comps = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++comps;
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : adj[v]) {
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
      }
    }
  }
  return comps;
}

// Cycle detection by DFS with parent tracking.
inline bool dfs_acyclic(std::size_t n, const EdgeSet& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Edge& e : edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  std::vector<int> state(n, 0);
  std::function<bool(std::size_t, std::size_t)> visit = [&](std::size_t v, std::size_t parent) {
    state[v] = 1;
    for (auto w : adj[v]) {
      if (w == parent) continue;
      if (state[w] != 0) return false;
      if (!visit(w, v)) return false;
    }
    return true;
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (state[s] == 0 && !visit(s, n)) return false;
  }
  return true;
}

inline bool oracle_is_tree(std::size_t n, const EdgeSet& edges) {
  if (n == 0) return edges.empty();
  return bfs_components(n, edges) == 1 && edges.size() == n - 1;
}

// Minimum spanning-tree cost by enumerating every (n-1)-subset of the
// complete graph's edges and keeping those that form a tree.
inline double brute_force_mst_cost(const tcg::EdgeProbabilities& p) {
  const std::size_t n = p.node_count();
  if (n <= 1) return 0.0;
  std::vector<Edge> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
  }
  const std::size_t m = all.size();
  const std::size_t k = n - 1;
  std::vector<bool> pick(m, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(k), true);
  double best = std::numeric_limits<double>::infinity();
  do {
    EdgeSet s;
    double cost = 0.0;
    for (std::size_t q = 0; q < m; ++q) {
      if (pick[q]) {
        s.insert(all[q]);
        cost += p.at(all[q].i, all[q].j).neg;
      }
    }
    if (cost < best && bfs_components(n, s) == 1) best = cost;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

inline tcg::EdgeProbabilities random_probabilities(std::size_t n, std::mt19937_64& rng, bool quantized = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> q(0, 4);
  std::vector<tcg::ProbPair> probs(tcg::pair_count(n));
  for (auto& pp : probs) {
    const double pos = quantized ? q(rng) / 4.0 : u(rng);
    pp = {pos, 1.0 - pos};
  }
  return tcg::EdgeProbabilities(n, std::move(probs));
}

// Mean squared distance of the best permutation matching.
inline double brute_force_transport(const std::vector<Point>& a, const std::vector<Point>& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double dx = a[i].x - b[perm[i]].x;
      const double dy = a[i].y - b[perm[i]].y;
      s += dx * dx + dy * dy;
    }
    best = std::min(best, s / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - a.x - t * dx, p.y - a.y - t * dy);
}

inline double rel_err(double a, double b, double floor = 1e-3) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tcg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
