#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tcg/graph.hpp"
#include "tcg/metrics.hpp"
#include "tcg/mst.hpp"
#include "tcg/scorer.hpp"
#include "tcg/sfs.hpp"

namespace tcg {

// Where the tree constraint is applied:
//   unconstrained  neither in training nor at inference
//   test_time      MST at inference only
//   train_only     SFS layer in training, plain thresholding at inference
//   ours           SFS layer in training and MST at inference
enum class ConstraintMode { unconstrained, test_time, train_only, ours };

ConstraintMode parse_mode(std::string_view name);
std::string_view mode_name(ConstraintMode mode);
bool trains_with_constraint(ConstraintMode mode) noexcept;
bool infers_with_projection(ConstraintMode mode) noexcept;

struct TrainConfig {
  ConstraintMode mode = ConstraintMode::ours;
  double lambda = 10.0;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 100;
  // Loss weight of positive pairs; <= 0 selects #neg/#pos clamped to [1, 50].
  double positive_weight = 0.0;
  double node_noise = 0.005;
  std::uint64_t seed = 0;
  std::size_t hidden = 64;
  MetricsConfig metrics;

  void validate() const;
};

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg);
// Keys absent from `j` keep the values already in `cfg`.
void merge_train_config(const nlohmann::json& j, TrainConfig& cfg);

struct LossBreakdown {
  double l_unconst = 0.0;
  double l_const = 0.0;
  double l_edge = 0.0;
};

struct EdgeLossResult {
  LossBreakdown loss;
  std::vector<LogitPair> logit_grad;  // dL_edge / df per pair
};

// Weight of the positive pairs for a target set.
double positive_pair_weight(std::span<const Target> targets, double configured);

// Weighted-mean cross entropy of the unconstrained prediction, plus the same
// for the SFS output when `delta` is given (l_const is 0 otherwise).
EdgeLossResult edge_loss(const EdgeLogits& logits, const EdgeDelta* delta,
                         std::span<const Target> targets, double positive_weight, double lambda);

using Projector = std::function<Projection(const EdgeProbabilities&)>;

struct SampleLoss {
  LossBreakdown loss;
  std::vector<double> grad;  // d l_edge / d params
  EdgeDelta delta;
};

// Full forward/backward for one sample. `delta` null means unconstrained.
SampleLoss sample_loss(const ScorerModel& model, std::span<const Point> nodes,
                       std::span<const Target> targets, const EdgeDelta* delta,
                       double positive_weight, double lambda);

// Forward pass, projection when the mode trains with the constraint, then
// sample_loss with the resulting delta.
SampleLoss sample_loss(const ScorerModel& model, std::span<const Point> nodes,
                       std::span<const Target> targets, const TrainConfig& cfg,
                       const Projector& projector);

// Gaussian perturbation of node coordinates, clamped to [0,1].
std::vector<Point> perturb_nodes(std::span<const Point> nodes, double sigma, std::uint64_t seed);

struct TrainingSample {
  std::vector<Point> nodes;  // perturbed
  std::vector<Target> targets;
};

std::vector<TrainingSample> make_training_samples(std::span<const SpatialGraph> graphs,
                                                  double sigma, std::uint64_t seed);

struct EpochLog {
  std::size_t epoch = 0;
  double l_unconst = 0.0;
  double l_const = 0.0;
  double val_smd = 0.0;
  double val_f1 = 0.0;
  double tree_rate = 0.0;
  bool has_validation = false;
};

nlohmann::ordered_json epoch_log_to_json(const EpochLog& e);

struct TrainResult {
  ScorerModel model;            // best-validation checkpoint (final if no validation)
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::vector<std::vector<double>> trajectory;  // params after each epoch, when requested
};

struct TrainOptions {
  Projector projector;  // defaults to project()
  bool record_trajectory = false;
};

// SGD with momentum, one update per sample, seeded shuffle each epoch.
// Throws InputError on an empty training set, NumericalError on a non-finite
// loss (the message names the last good epoch).
TrainResult train(std::span<const SpatialGraph> train_set, std::span<const SpatialGraph> val_set,
                  const TrainConfig& cfg, const TrainOptions& options = {});

// Thresholded edges (projected = false) or the MST of the predicted
// probabilities.
SpatialGraph infer(const ScorerModel& model, std::span<const Point> nodes, bool projected);

// Infers every graph from its perturbed nodes (noise seeded per index from
// `seed`) and evaluates against the ground truth.
MetricsReport evaluate_model(const ScorerModel& model, std::span<const SpatialGraph> gts,
                             bool projected, double sigma, std::uint64_t seed,
                             const MetricsConfig& metrics, std::vector<SpatialGraph>* predictions = nullptr);

// Seeded split of [0, n) into (train, validation) index lists.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                             double val_fraction,
                                                                             std::uint64_t seed);

}  // namespace tcg
