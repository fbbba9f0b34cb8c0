#include "tcg/sfs.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>

#include "tcg/errors.hpp"
#include "tcg/pairs.hpp"

namespace tcg {

EdgeLogits::EdgeLogits(std::size_t n, std::vector<LogitPair> feats)
    : n_(n), feats_(std::move(feats)) {
  if (feats_.size() != pair_count(n_)) {
    throw InputError("expected " + std::to_string(pair_count(n_)) + " logit pairs, got " +
                     std::to_string(feats_.size()));
  }
  for (const LogitPair& f : feats_) {
    if (!std::isfinite(f.pos) || !std::isfinite(f.neg)) throw InputError("non-finite logit");
  }
}

void SfsConfig::validate() const {
  if (!std::isfinite(lambda) || lambda <= 0.0) throw InputError("lambda must be positive");
  if (std::exp(-lambda) < DBL_MIN) {
    throw InputError("lambda too large: exp(-lambda) is not a normal double");
  }
}

double SfsConfig::suppression_floor() const { return std::exp(-lambda); }

std::string format_suppression_floor(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", std::exp(-lambda));
  return buf;
}

ProbPair softmax2(const LogitPair& f) {
  const double m = std::max(f.pos, f.neg);
  const double a = std::exp(f.pos - m);
  const double b = std::exp(f.neg - m);
  const double z = a + b;
  return ProbPair{a / z, b / z};
}

double cross_entropy(const LogitPair& f, const Target& t) {
  const double m = std::max(f.pos, f.neg);
  const double lse = m + std::log(std::exp(f.pos - m) + std::exp(f.neg - m));
  double loss = 0.0;
  if (t.pos != 0.0) loss += t.pos * (lse - f.pos);
  if (t.neg != 0.0) loss += t.neg * (lse - f.neg);
  return loss;
}

std::vector<Suppression> suppression_map(std::size_t n, const EdgeDelta& delta) {
  std::vector<Suppression> out(pair_count(n), Suppression::none);
  auto mark = [&](const EdgeSet& edges, Suppression s, const char* which) {
    for (const Edge& e : edges) {
      if (e.i >= e.j || e.j >= n) {
        throw InputError(std::string("delta ") + which + " pair (" + std::to_string(e.i) + "," +
                         std::to_string(e.j) + ") invalid for " + std::to_string(n) + " nodes");
      }
      Suppression& slot = out[pair_index(n, e)];
      if (slot != Suppression::none) throw InputError("pair both added and removed");
      slot = s;
    }
  };
  mark(delta.added, Suppression::negative, "added");
  mark(delta.removed, Suppression::positive, "removed");
  return out;
}

LogitPair suppress(const LogitPair& f, Suppression s, double lambda) {
  switch (s) {
    case Suppression::negative:
      return {f.pos, -lambda};
    case Suppression::positive:
      return {-lambda, f.neg};
    case Suppression::none:
      break;
  }
  return f;
}

EdgeProbabilities softmax_all(const EdgeLogits& f) {
  std::vector<ProbPair> probs;
  probs.reserve(f.feats().size());
  for (const LogitPair& p : f.feats()) probs.push_back(softmax2(p));
  return EdgeProbabilities(f.node_count(), std::move(probs));
}

SfsOutput sfs_forward(const EdgeLogits& f, const EdgeDelta& delta, const SfsConfig& cfg) {
  cfg.validate();
  SfsOutput out;
  out.suppressed = suppression_map(f.node_count(), delta);
  out.unconstrained_probs = softmax_all(f);
  out.delta = delta;

  std::vector<ProbPair> constrained;
  constrained.reserve(f.feats().size());
  for (std::size_t k = 0; k < f.feats().size(); ++k) {
    const LogitPair& fk = f.feats()[k];
    const Suppression s = out.suppressed[k];
    if (s == Suppression::none) {
      constrained.push_back(out.unconstrained_probs.probs()[k]);
      continue;
    }
    const double surviving = s == Suppression::negative ? fk.pos : fk.neg;
    if (surviving <= -cfg.lambda) ++out.floor_violations;
    constrained.push_back(softmax2(suppress(fk, s, cfg.lambda)));
  }
  out.constrained_probs = EdgeProbabilities(f.node_count(), std::move(constrained));
  return out;
}

void check_one_hot(const Target& t) {
  const bool ok = (t.pos == 1.0 && t.neg == 0.0) || (t.pos == 0.0 && t.neg == 1.0);
  if (!ok) throw InputError("target is not one-hot");
}

LogitPair unconstrained_pair_gradient(const LogitPair& f, const Target& t) {
  const ProbPair y = softmax2(f);
  return {y.pos - t.pos, y.neg - t.neg};
}

LogitPair sfs_pair_gradient(const LogitPair& f, Suppression s, const Target& t, double lambda) {
  const ProbPair y = softmax2(suppress(f, s, lambda));
  switch (s) {
    case Suppression::negative:
      return {y.pos - t.pos, 0.0};
    case Suppression::positive:
      return {0.0, y.neg - t.neg};
    case Suppression::none:
      break;
  }
  return {y.pos - t.pos, y.neg - t.neg};
}

LogitPair approximate_pair_gradient(const LogitPair& f, Suppression s, const Target& t) {
  switch (s) {
    case Suppression::negative:
      return {1.0 - t.pos, 0.0};
    case Suppression::positive:
      return {0.0, 1.0 - t.neg};
    case Suppression::none:
      break;
  }
  return unconstrained_pair_gradient(f, t);
}

std::vector<LogitPair> sfs_backward(const EdgeLogits& f, const EdgeDelta& delta,
                                    std::span<const Target> targets, const SfsConfig& cfg) {
  cfg.validate();
  if (targets.size() != f.feats().size()) throw InputError("target/logit pair count mismatch");
  const auto suppressed = suppression_map(f.node_count(), delta);
  std::vector<LogitPair> grad(f.feats().size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    check_one_hot(targets[k]);
    grad[k] = sfs_pair_gradient(f.feats()[k], suppressed[k], targets[k], cfg.lambda);
  }
  return grad;
}

int classify_case(const LogitPair& f, Suppression s, const Target& t) {
  check_one_hot(t);
  const bool positive = f.pos > f.neg;
  const bool wants_edge = t.pos == 1.0;
  if (positive) {
    if (s == Suppression::negative) {
      throw InputError("pair predicted as an edge cannot be added by the projection");
    }
    if (s == Suppression::none) return wants_edge ? 1 : 2;
    return wants_edge ? 3 : 4;
  }
  if (s == Suppression::positive) {
    throw InputError("pair predicted as a non-edge cannot be removed by the projection");
  }
  if (s == Suppression::none) return wants_edge ? 5 : 6;
  return wants_edge ? 7 : 8;
}

std::vector<Target> targets_from_edges(std::size_t n, const EdgeSet& edges) {
  std::vector<Target> t(pair_count(n), Target{0.0, 1.0});
  for (const Edge& e : edges) {
    if (e.i >= e.j || e.j >= n) throw InputError("target edge outside node range");
    t[pair_index(n, e)] = Target{1.0, 0.0};
  }
  return t;
}

}  // namespace tcg
