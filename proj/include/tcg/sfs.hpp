#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcg/graph.hpp"
#include "tcg/mst.hpp"

namespace tcg {

// Pre-softmax features [f+, f-] of one node pair; also used for gradients
// with respect to those features.
struct LogitPair {
  double pos = 0.0;
  double neg = 0.0;

  friend bool operator==(const LogitPair&, const LogitPair&) = default;
};

// One-hot ground truth [t+, t-].
struct Target {
  double pos = 0.0;
  double neg = 1.0;
};

class EdgeLogits {
 public:
  EdgeLogits() = default;
  EdgeLogits(std::size_t n, std::vector<LogitPair> feats);

  std::size_t node_count() const noexcept { return n_; }
  const std::vector<LogitPair>& feats() const noexcept { return feats_; }

 private:
  std::size_t n_ = 0;
  std::vector<LogitPair> feats_;
};

struct SfsConfig {
  // Suppression constant; exp(-lambda) must stay a normal double.
  double lambda = 10.0;

  void validate() const;
  double suppression_floor() const;  // exp(-lambda)
};

// "4.5e-05" style rendering of exp(-lambda), two significant digits.
std::string format_suppression_floor(double lambda);

// Which feature of a pair the layer overwrote with -lambda.
enum class Suppression : std::uint8_t {
  none,
  negative,  // pair in E+: f- := -lambda
  positive,  // pair in E-: f+ := -lambda
};

struct SfsOutput {
  EdgeProbabilities unconstrained_probs;
  EdgeProbabilities constrained_probs;
  EdgeDelta delta;
  std::vector<Suppression> suppressed;  // pair_index order
  // Suppressed pairs whose surviving logit is <= -lambda; thresholding the
  // constrained output can disagree with the projection on these.
  std::size_t floor_violations = 0;
};

// Softmax with max-subtraction.
ProbPair softmax2(const LogitPair& f);

// -t+ log y+ - t- log y- for y = softmax2(f), via log-sum-exp.
double cross_entropy(const LogitPair& f, const Target& t);

// Per-pair suppression pattern for a delta. Throws InputError when the delta
// references pairs outside n nodes or a pair is both added and removed.
std::vector<Suppression> suppression_map(std::size_t n, const EdgeDelta& delta);

// The features after suppression; the replaced entry is a constant.
LogitPair suppress(const LogitPair& f, Suppression s, double lambda);

EdgeProbabilities softmax_all(const EdgeLogits& f);

SfsOutput sfs_forward(const EdgeLogits& f, const EdgeDelta& delta, const SfsConfig& cfg);

// d CE(sigma(suppress(f)), t) / d f for one pair. The suppressed coordinate
// is exactly zero.
LogitPair sfs_pair_gradient(const LogitPair& f, Suppression s, const Target& t, double lambda);

// d CE(softmax2(f), t) / d f = y - t.
LogitPair unconstrained_pair_gradient(const LogitPair& f, const Target& t);

// Gradient with the epsilon terms dropped: [1 - t+, 0] on E+, [0, 1 - t-] on E-.
LogitPair approximate_pair_gradient(const LogitPair& f, Suppression s, const Target& t);

// Per-pair gradient of sum_pairs CE(constrained y, t) with respect to f.
// Throws InputError on non one-hot targets or a size mismatch.
std::vector<LogitPair> sfs_backward(const EdgeLogits& f, const EdgeDelta& delta,
                                    std::span<const Target> targets, const SfsConfig& cfg);

// Row (1..8) of the case analysis table: sign of f+ - f- (ties count as
// negative), suppression, and target. Throws InputError on impossible
// combinations, e.g. f+ > f- for a pair the projection added.
int classify_case(const LogitPair& f, Suppression s, const Target& t);

std::vector<Target> targets_from_edges(std::size_t n, const EdgeSet& edges);

void check_one_hot(const Target& t);

}  // namespace tcg
