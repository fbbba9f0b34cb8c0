#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "tcg/graph.hpp"

namespace tcg {

// Existence / non-existence probability of one node pair.
struct ProbPair {
  double pos = 0.5;
  double neg = 0.5;
};

// Per-pair edge probabilities over the complete graph on n nodes, stored in
// pair_index order. Validated on construction: each pair sums to 1 within
// 1e-9 and lies in [0,1].
class EdgeProbabilities {
 public:
  static constexpr double kSumTolerance = 1e-9;

  EdgeProbabilities() = default;
  EdgeProbabilities(std::size_t n, std::vector<ProbPair> probs);

  std::size_t node_count() const noexcept { return n_; }
  const std::vector<ProbPair>& probs() const noexcept { return probs_; }
  const ProbPair& at(std::size_t i, std::size_t j) const;

 private:
  std::size_t n_ = 0;
  std::vector<ProbPair> probs_;
};

// Strict comparison: ties (pos == neg) are not edges.
EdgeSet threshold_edges(const EdgeProbabilities& p);

struct MstResult {
  EdgeSet edges;
  double total_cost = 0.0;
  bool degenerate = false;  // set for n == 0
};

// Kruskal over the complete graph with cost(i,j) = neg(i,j). Edges are taken
// in (cost, i, j) lexicographic order, so ties resolve deterministically.
MstResult project_mst(const EdgeProbabilities& p);

struct Projection {
  EdgeSet edges;  // E
  EdgeDelta delta;
  bool degenerate = false;
};

// E = project_mst(p), delta = edge_delta(threshold_edges(p), E).
Projection project(const EdgeProbabilities& p);

// {"n":4,"probs":[{"i":0,"j":1,"pos":0.9,"neg":0.1},...]}. Every pair must
// appear exactly once.
EdgeProbabilities probabilities_from_json(const nlohmann::json& j);
nlohmann::ordered_json probabilities_to_json(const EdgeProbabilities& p);

}  // namespace tcg
