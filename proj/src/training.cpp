#include "tcg/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tcg/errors.hpp"
#include "tcg/io.hpp"
#include "tcg/pairs.hpp"
#include "tcg/parallel.hpp"
#include "tcg/rng.hpp"

namespace tcg {

ConstraintMode parse_mode(std::string_view name) {
  if (name == "unconstrained") return ConstraintMode::unconstrained;
  if (name == "test-time") return ConstraintMode::test_time;
  if (name == "train-only") return ConstraintMode::train_only;
  if (name == "ours") return ConstraintMode::ours;
  throw InputError("unknown constraint mode '" + std::string(name) +
                   "' (expected unconstrained, test-time, train-only, ours)");
}

std::string_view mode_name(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::unconstrained:
      return "unconstrained";
    case ConstraintMode::test_time:
      return "test-time";
    case ConstraintMode::train_only:
      return "train-only";
    case ConstraintMode::ours:
      return "ours";
  }
  return "unknown";
}

bool trains_with_constraint(ConstraintMode mode) noexcept {
  return mode == ConstraintMode::ours || mode == ConstraintMode::train_only;
}

bool infers_with_projection(ConstraintMode mode) noexcept {
  return mode == ConstraintMode::ours || mode == ConstraintMode::test_time;
}

void TrainConfig::validate() const {
  SfsConfig{lambda}.validate();
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InputError("momentum must lie in [0,1)");
  if (!std::isfinite(positive_weight)) throw InputError("positive weight must be finite");
  if (!(node_noise >= 0.0) || !std::isfinite(node_noise)) {
    throw InputError("node noise must be non-negative");
  }
  if (hidden == 0) throw InputError("hidden width must be positive");
  if (metrics.k_points == 0) throw InputError("k-points must be positive");
  if (!(metrics.topo_radius > 0.0)) throw InputError("topo radius must be positive");
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["mode"] = mode_name(cfg.mode);
  j["lambda"] = cfg.lambda;
  j["suppression_floor"] = format_suppression_floor(cfg.lambda);
  j["lr"] = cfg.learning_rate;
  j["momentum"] = cfg.momentum;
  j["epochs"] = cfg.epochs;
  j["positive_weight"] = cfg.positive_weight;
  j["noise"] = cfg.node_noise;
  j["seed"] = cfg.seed;
  j["hidden"] = cfg.hidden;
  j["k_points"] = cfg.metrics.k_points;
  j["topo_radius"] = cfg.metrics.topo_radius;
  return j;
}

void merge_train_config(const nlohmann::json& j, TrainConfig& cfg) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ParseError(key, "not a number");
    dst = j[key].get<double>();
  };
  auto count = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) throw ParseError(key, "not a non-negative integer");
    dst = j[key].get<std::remove_reference_t<decltype(dst)>>();
  };
  if (j.contains("mode")) {
    if (!j["mode"].is_string()) throw ParseError("mode", "not a string");
    try {
      cfg.mode = parse_mode(j["mode"].get<std::string>());
    } catch (const InputError& e) {
      throw ParseError("mode", e.what());
    }
  }
  number("lambda", cfg.lambda);
  number("lr", cfg.learning_rate);
  number("momentum", cfg.momentum);
  count("epochs", cfg.epochs);
  number("positive_weight", cfg.positive_weight);
  number("noise", cfg.node_noise);
  count("seed", cfg.seed);
  count("hidden", cfg.hidden);
  count("k_points", cfg.metrics.k_points);
  number("topo_radius", cfg.metrics.topo_radius);
}

double positive_pair_weight(std::span<const Target> targets, double configured) {
  if (configured > 0.0) return configured;
  std::size_t pos = 0;
  for (const Target& t : targets) pos += t.pos == 1.0 ? 1 : 0;
  const std::size_t neg = targets.size() - pos;
  if (pos == 0) return 1.0;
  return std::clamp(static_cast<double>(neg) / static_cast<double>(pos), 1.0, 50.0);
}

EdgeLossResult edge_loss(const EdgeLogits& logits, const EdgeDelta* delta,
                         std::span<const Target> targets, double positive_weight, double lambda) {
  const auto& f = logits.feats();
  if (targets.size() != f.size()) throw InputError("target/logit pair count mismatch");
  std::vector<Suppression> suppressed;
  if (delta != nullptr) suppressed = suppression_map(logits.node_count(), *delta);

  double total_weight = 0.0;
  for (const Target& t : targets) {
    check_one_hot(t);
    total_weight += t.pos == 1.0 ? positive_weight : 1.0;
  }

  EdgeLossResult out;
  out.logit_grad.assign(f.size(), LogitPair{});
  if (total_weight == 0.0) return out;

  for (std::size_t k = 0; k < f.size(); ++k) {
    const Target& t = targets[k];
    const double w = (t.pos == 1.0 ? positive_weight : 1.0) / total_weight;
    out.loss.l_unconst += w * cross_entropy(f[k], t);
    const LogitPair gu = unconstrained_pair_gradient(f[k], t);
    LogitPair g{w * gu.pos, w * gu.neg};
    if (delta != nullptr) {
      out.loss.l_const += w * cross_entropy(suppress(f[k], suppressed[k], lambda), t);
      const LogitPair gc = sfs_pair_gradient(f[k], suppressed[k], t, lambda);
      g.pos += w * gc.pos;
      g.neg += w * gc.neg;
    }
    out.logit_grad[k] = g;
  }
  out.loss.l_edge = out.loss.l_unconst + out.loss.l_const;
  return out;
}

SampleLoss sample_loss(const ScorerModel& model, std::span<const Point> nodes,
                       std::span<const Target> targets, const EdgeDelta* delta,
                       double positive_weight, double lambda) {
  const EdgeLogits logits = score_edges(model, nodes);
  EdgeLossResult el = edge_loss(logits, delta, targets, positive_weight, lambda);
  SampleLoss out;
  out.loss = el.loss;
  out.grad.assign(model.params().size(), 0.0);
  accumulate_parameter_gradient(model, nodes, el.logit_grad, out.grad);
  if (delta != nullptr) out.delta = *delta;
  return out;
}

SampleLoss sample_loss(const ScorerModel& model, std::span<const Point> nodes,
                       std::span<const Target> targets, const TrainConfig& cfg,
                       const Projector& projector) {
  const double w = positive_pair_weight(targets, cfg.positive_weight);
  if (!trains_with_constraint(cfg.mode)) {
    return sample_loss(model, nodes, targets, nullptr, w, cfg.lambda);
  }
  const EdgeLogits logits = score_edges(model, nodes);
  const Projection proj = projector ? projector(softmax_all(logits)) : project(softmax_all(logits));
  EdgeLossResult el = edge_loss(logits, &proj.delta, targets, w, cfg.lambda);
  SampleLoss out;
  out.loss = el.loss;
  out.grad.assign(model.params().size(), 0.0);
  accumulate_parameter_gradient(model, nodes, el.logit_grad, out.grad);
  out.delta = proj.delta;
  return out;
}

std::vector<Point> perturb_nodes(std::span<const Point> nodes, double sigma, std::uint64_t seed) {
  std::vector<Point> out(nodes.begin(), nodes.end());
  if (sigma <= 0.0) return out;
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (Point& p : out) {
    p.x = std::clamp(p.x + noise(rng), 0.0, 1.0);
    p.y = std::clamp(p.y + noise(rng), 0.0, 1.0);
  }
  return out;
}

std::vector<TrainingSample> make_training_samples(std::span<const SpatialGraph> graphs,
                                                  double sigma, std::uint64_t seed) {
  std::vector<TrainingSample> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const SpatialGraph& g = graphs[i];
    out.push_back({perturb_nodes(g.nodes(), sigma, derive_seed(seed, streams::kNodeNoise, i)),
                   targets_from_edges(g.node_count(), g.edges())});
  }
  return out;
}

nlohmann::ordered_json epoch_log_to_json(const EpochLog& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["l_unconst"] = e.l_unconst;
  j["l_const"] = e.l_const;
  if (e.has_validation) {
    j["val_smd"] = e.val_smd;
    j["val_f1"] = e.val_f1;
    j["tree_rate"] = e.tree_rate;
  } else {
    j["val_smd"] = nullptr;
    j["val_f1"] = nullptr;
    j["tree_rate"] = nullptr;
  }
  return j;
}

TrainResult train(std::span<const SpatialGraph> train_set, std::span<const SpatialGraph> val_set,
                  const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw InputError("training set is empty");

  const auto samples = make_training_samples(train_set, cfg.node_noise, cfg.seed);
  const bool projected = infers_with_projection(cfg.mode);
  const std::uint64_t val_seed = derive_seed(cfg.seed, streams::kValidationNoise, 0);

  TrainResult result;
  ScorerModel model = ScorerModel::initialize(cfg.hidden, cfg.seed);
  std::vector<double> velocity(model.params().size(), 0.0);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double best_smd = std::numeric_limits<double>::infinity();
  result.model = model;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, streams::kShuffle, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochLog entry;
    entry.epoch = epoch;
    for (std::size_t idx : order) {
      const TrainingSample& s = samples[idx];
      SampleLoss sl;
      try {
        sl = sample_loss(model, s.nodes, s.targets, cfg, options.projector);
      } catch (const NumericalError&) {
        sl.loss.l_edge = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(sl.loss.l_edge)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + " (sample " +
                             std::to_string(idx) + "); last good epoch " +
                             std::to_string(epoch - 1));
      }
      entry.l_unconst += sl.loss.l_unconst;
      entry.l_const += sl.loss.l_const;
      auto params = model.params();
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = cfg.momentum * velocity[p] + sl.grad[p];
        params[p] -= cfg.learning_rate * velocity[p];
      }
    }
    if (!model.all_finite()) {
      throw NumericalError("non-finite parameters after epoch " + std::to_string(epoch) +
                           "; last good epoch " + std::to_string(epoch - 1));
    }
    entry.l_unconst /= static_cast<double>(samples.size());
    entry.l_const /= static_cast<double>(samples.size());

    if (!val_set.empty()) {
      const MetricsReport r =
          evaluate_model(model, val_set, projected, cfg.node_noise, val_seed, cfg.metrics);
      entry.has_validation = true;
      entry.val_smd = r.smd;
      entry.val_f1 = r.topo_f1;
      entry.tree_rate = r.tree_rate;
      if (r.smd < best_smd) {
        best_smd = r.smd;
        result.model = model;
        result.best_epoch = epoch;
      }
    } else {
      result.model = model;
      result.best_epoch = epoch;
    }
    result.log.push_back(entry);
    if (options.record_trajectory) {
      result.trajectory.emplace_back(model.params().begin(), model.params().end());
    }
  }
  return result;
}

SpatialGraph infer(const ScorerModel& model, std::span<const Point> nodes, bool projected) {
  const EdgeProbabilities probs = softmax_all(score_edges(model, nodes));
  EdgeSet edges = projected ? project_mst(probs).edges : threshold_edges(probs);
  return SpatialGraph(std::vector<Point>(nodes.begin(), nodes.end()), std::move(edges));
}

MetricsReport evaluate_model(const ScorerModel& model, std::span<const SpatialGraph> gts,
                             bool projected, double sigma, std::uint64_t seed,
                             const MetricsConfig& metrics, std::vector<SpatialGraph>* predictions) {
  std::vector<SpatialGraph> preds(gts.size());
  std::vector<std::string> names(gts.size());
  parallel_for(gts.size(), metrics.threads, [&](std::size_t i) {
    const auto nodes =
        perturb_nodes(gts[i].nodes(), sigma, derive_seed(seed, streams::kNodeNoise, i));
    preds[i] = infer(model, nodes, projected);
    names[i] = sample_stem(i) + ".json";
  });
  MetricsReport report = evaluate_graphs(preds, gts, names, metrics);
  if (predictions != nullptr) *predictions = std::move(preds);
  return report;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                             double val_fraction,
                                                                             std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw InputError("validation fraction must lie in [0,1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, streams::kSplit, 0));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(tr.begin(), tr.end());
  return {tr, val};
}

}  // namespace tcg
