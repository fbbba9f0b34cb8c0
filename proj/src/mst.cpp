#include "tcg/mst.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "tcg/errors.hpp"
#include "tcg/pairs.hpp"
#include "tcg/union_find.hpp"

namespace tcg {

EdgeProbabilities::EdgeProbabilities(std::size_t n, std::vector<ProbPair> probs)
    : n_(n), probs_(std::move(probs)) {
  if (probs_.size() != pair_count(n_)) {
    throw InputError("expected " + std::to_string(pair_count(n_)) + " probability pairs, got " +
                     std::to_string(probs_.size()));
  }
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    const ProbPair& p = probs_[k];
    if (!(p.pos >= 0.0 && p.pos <= 1.0 && p.neg >= 0.0 && p.neg <= 1.0) ||
        std::abs(p.pos + p.neg - 1.0) > kSumTolerance) {
      throw InputError("probability pair " + std::to_string(k) + " is not a distribution");
    }
  }
}

const ProbPair& EdgeProbabilities::at(std::size_t i, std::size_t j) const {
  if (i >= j || j >= n_) throw InputError("pair out of range");
  return probs_[pair_index(n_, i, j)];
}

EdgeSet threshold_edges(const EdgeProbabilities& p) {
  EdgeSet out;
  const auto& probs = p.probs();
  for_each_pair(p.node_count(), [&](std::size_t k, std::size_t i, std::size_t j) {
    if (probs[k].pos > probs[k].neg) {
      out.insert(Edge{static_cast<NodeId>(i), static_cast<NodeId>(j)});
    }
  });
  return out;
}

MstResult project_mst(const EdgeProbabilities& p) {
  MstResult result;
  const std::size_t n = p.node_count();
  if (n == 0) {
    result.degenerate = true;
    return result;
  }

  struct Candidate {
    double cost;
    NodeId i;
    NodeId j;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(pair_count(n));
  const auto& probs = p.probs();
  for_each_pair(n, [&](std::size_t k, std::size_t i, std::size_t j) {
    candidates.push_back({probs[k].neg, static_cast<NodeId>(i), static_cast<NodeId>(j)});
  });
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.cost, a.i, a.j) < std::tie(b.cost, b.i, b.j);
  });

  UnionFind uf(n);
  for (const Candidate& c : candidates) {
    if (!uf.unite(c.i, c.j)) continue;
    result.edges.insert(Edge{c.i, c.j});
    result.total_cost += c.cost;
    if (result.edges.size() + 1 == n) break;
  }
  return result;
}

Projection project(const EdgeProbabilities& p) {
  MstResult mst = project_mst(p);
  Projection out;
  out.delta = edge_delta(threshold_edges(p), mst.edges, p.node_count());
  out.edges = std::move(mst.edges);
  out.degenerate = mst.degenerate;
  return out;
}

EdgeProbabilities probabilities_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  if (!j.contains("n") || !j["n"].is_number_unsigned()) {
    throw ParseError("n", "missing or not a non-negative integer");
  }
  if (!j.contains("probs") || !j["probs"].is_array()) throw ParseError("probs", "missing array");
  const auto n = j["n"].get<std::size_t>();
  const auto& arr = j["probs"];
  if (arr.size() != pair_count(n)) {
    throw ParseError("probs", "expected " + std::to_string(pair_count(n)) + " entries, got " +
                                  std::to_string(arr.size()));
  }
  std::vector<ProbPair> probs(pair_count(n));
  std::vector<bool> seen(probs.size(), false);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string field = "probs[" + std::to_string(k) + "]";
    const auto& e = arr[k];
    for (const char* key : {"i", "j"}) {
      if (!e.contains(key) || !e[key].is_number_unsigned()) {
        throw ParseError(field + "." + key, "missing or not a node id");
      }
    }
    for (const char* key : {"pos", "neg"}) {
      if (!e.contains(key) || !e[key].is_number()) {
        throw ParseError(field + "." + key, "missing or not a number");
      }
    }
    auto a = e["i"].get<std::size_t>();
    auto b = e["j"].get<std::size_t>();
    if (a == b || a >= n || b >= n) throw ParseError(field, "invalid node pair");
    if (a > b) std::swap(a, b);
    const std::size_t idx = pair_index(n, a, b);
    if (seen[idx]) throw ParseError(field, "duplicate pair");
    seen[idx] = true;
    const ProbPair pp{e["pos"].get<double>(), e["neg"].get<double>()};
    if (!(pp.pos >= 0.0 && pp.pos <= 1.0 && pp.neg >= 0.0 && pp.neg <= 1.0) ||
        std::abs(pp.pos + pp.neg - 1.0) > EdgeProbabilities::kSumTolerance) {
      throw ParseError(field, "pos and neg must lie in [0,1] and sum to 1");
    }
    probs[idx] = pp;
  }
  return EdgeProbabilities(n, std::move(probs));
}

nlohmann::ordered_json probabilities_to_json(const EdgeProbabilities& p) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for_each_pair(p.node_count(), [&](std::size_t k, std::size_t i, std::size_t j) {
    nlohmann::ordered_json e;
    e["i"] = i;
    e["j"] = j;
    e["pos"] = p.probs()[k].pos;
    e["neg"] = p.probs()[k].neg;
    arr.push_back(std::move(e));
  });
  nlohmann::ordered_json out;
  out["n"] = p.node_count();
  out["probs"] = std::move(arr);
  return out;
}

}  // namespace tcg
