#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "tcg/graph.hpp"
#include "tcg/sfs.hpp"

namespace tcg {

inline constexpr std::size_t kPairFeatureDim = 7;
using PairFeatures = std::array<double, kPairFeatureDim>;

// [xi, yi, xj, yj, |xi-xj|, |yi-yj|, distance] for i < j.
PairFeatures pair_features(std::span<const Point> nodes, std::size_t i, std::size_t j);

// Pair relation head:
//   f = W2 * layernorm(relu(W1 * x + b1)) + b2,
// with a per-pair layer normalization (learned gain and bias) over the H
// hidden units. All parameters live in one flat buffer so optimizers and
// gradient checks can treat them uniformly; the span accessors give the
// named views (row-major matrices).
class ScorerModel {
 public:
  static constexpr double kLayerNormEps = 1e-5;

  ScorerModel() = default;
  // All parameters zero, layer-norm gain included.
  explicit ScorerModel(std::size_t hidden);
  // He-normal W1, scaled normal W2, unit gain, zero biases.
  static ScorerModel initialize(std::size_t hidden, std::uint64_t seed);

  std::size_t hidden() const noexcept { return hidden_; }
  static std::size_t parameter_count(std::size_t hidden) noexcept { return 12 * hidden + 2; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<double> w1() noexcept { return view(0, hidden_ * kPairFeatureDim); }
  std::span<double> b1() noexcept { return view(7 * hidden_, hidden_); }
  std::span<double> ln_gain() noexcept { return view(8 * hidden_, hidden_); }
  std::span<double> ln_bias() noexcept { return view(9 * hidden_, hidden_); }
  std::span<double> w2() noexcept { return view(10 * hidden_, 2 * hidden_); }
  std::span<double> b2() noexcept { return view(12 * hidden_, 2); }
  std::span<const double> w1() const noexcept { return view(0, hidden_ * kPairFeatureDim); }
  std::span<const double> b1() const noexcept { return view(7 * hidden_, hidden_); }
  std::span<const double> ln_gain() const noexcept { return view(8 * hidden_, hidden_); }
  std::span<const double> ln_bias() const noexcept { return view(9 * hidden_, hidden_); }
  std::span<const double> w2() const noexcept { return view(10 * hidden_, 2 * hidden_); }
  std::span<const double> b2() const noexcept { return view(12 * hidden_, 2); }

  bool all_finite() const noexcept;

  friend bool operator==(const ScorerModel&, const ScorerModel&) = default;

 private:
  std::span<double> view(std::size_t off, std::size_t len) noexcept {
    return std::span<double>(params_).subspan(off, len);
  }
  std::span<const double> view(std::size_t off, std::size_t len) const noexcept {
    return std::span<const double>(params_).subspan(off, len);
  }

  std::size_t hidden_ = 0;
  std::vector<double> params_;
};

LogitPair score_pair(const ScorerModel& model, const PairFeatures& x);

// Logits for every pair of the node list, in pair_index order.
EdgeLogits score_edges(const ScorerModel& model, std::span<const Point> nodes);

// Adds sum_pairs dL/df(pair) * df(pair)/dtheta into `grad` (same layout as
// ScorerModel::params()).
void accumulate_parameter_gradient(const ScorerModel& model, std::span<const Point> nodes,
                                   std::span<const LogitPair> logit_grad, std::span<double> grad);

// Smallest |W1 x + b1| over all pairs and hidden units. Finite-difference
// checks with step h are only meaningful when this exceeds h times the
// largest input magnitude (no ReLU kink is crossed).
double min_preactivation_margin(const ScorerModel& model, std::span<const Point> nodes);

nlohmann::ordered_json model_to_json(const ScorerModel& model);
// Throws ParseError naming the offending field.
ScorerModel model_from_json(const nlohmann::json& j);

}  // namespace tcg
