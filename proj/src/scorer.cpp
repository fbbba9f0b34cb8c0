#include "tcg/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tcg/errors.hpp"
#include "tcg/pairs.hpp"
#include "tcg/rng.hpp"

namespace tcg {

PairFeatures pair_features(std::span<const Point> nodes, std::size_t i, std::size_t j) {
  const Point& a = nodes[i];
  const Point& b = nodes[j];
  const double dx = std::abs(a.x - b.x);
  const double dy = std::abs(a.y - b.y);
  return {a.x, a.y, b.x, b.y, dx, dy, std::hypot(dx, dy)};
}

ScorerModel::ScorerModel(std::size_t hidden)
    : hidden_(hidden), params_(parameter_count(hidden), 0.0) {
  if (hidden == 0) throw InputError("hidden width must be positive");
}

ScorerModel ScorerModel::initialize(std::size_t hidden, std::uint64_t seed) {
  ScorerModel m(hidden);
  Rng rng(derive_seed(seed, streams::kInit, 0));
  std::normal_distribution<double> w1_dist(0.0, std::sqrt(2.0 / kPairFeatureDim));
  std::normal_distribution<double> w2_dist(0.0, std::sqrt(1.0 / static_cast<double>(hidden)));
  for (double& w : m.w1()) w = w1_dist(rng);
  for (double& w : m.w2()) w = w2_dist(rng);
  std::fill(m.ln_gain().begin(), m.ln_gain().end(), 1.0);
  return m;
}

bool ScorerModel::all_finite() const noexcept {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

// Forward activations of one pair, kept for the backward pass.
struct PairActivations {
  explicit PairActivations(std::size_t h) : z(h), normed(h), out(h) {}
  std::vector<double> z;       // W1 x + b1
  std::vector<double> normed;  // (relu(z) - mean) / std
  std::vector<double> out;     // gain * normed + bias
  double inv_std = 0.0;
};

LogitPair forward(const ScorerModel& m, const PairFeatures& x, PairActivations& act) {
  const std::size_t h = m.hidden();
  const auto w1 = m.w1();
  const auto b1 = m.b1();
  double mean = 0.0;
  for (std::size_t u = 0; u < h; ++u) {
    double z = b1[u];
    const double* row = &w1[u * kPairFeatureDim];
    for (std::size_t k = 0; k < kPairFeatureDim; ++k) z += row[k] * x[k];
    act.z[u] = z;
    mean += std::max(z, 0.0);
  }
  mean /= static_cast<double>(h);
  double var = 0.0;
  for (std::size_t u = 0; u < h; ++u) {
    const double c = std::max(act.z[u], 0.0) - mean;
    var += c * c;
  }
  var /= static_cast<double>(h);
  act.inv_std = 1.0 / std::sqrt(var + ScorerModel::kLayerNormEps);

  const auto gain = m.ln_gain();
  const auto bias = m.ln_bias();
  const auto w2 = m.w2();
  const auto b2 = m.b2();
  LogitPair f{b2[0], b2[1]};
  for (std::size_t u = 0; u < h; ++u) {
    act.normed[u] = (std::max(act.z[u], 0.0) - mean) * act.inv_std;
    act.out[u] = gain[u] * act.normed[u] + bias[u];
    f.pos += w2[u] * act.out[u];
    f.neg += w2[h + u] * act.out[u];
  }
  return f;
}

}  // namespace

LogitPair score_pair(const ScorerModel& model, const PairFeatures& x) {
  PairActivations act(model.hidden());
  return forward(model, x, act);
}

EdgeLogits score_edges(const ScorerModel& model, std::span<const Point> nodes) {
  const std::size_t n = nodes.size();
  std::vector<LogitPair> feats(pair_count(n));
  PairActivations act(model.hidden());
  for_each_pair(n, [&](std::size_t k, std::size_t i, std::size_t j) {
    feats[k] = forward(model, pair_features(nodes, i, j), act);
  });
  for (const LogitPair& f : feats) {
    if (!std::isfinite(f.pos) || !std::isfinite(f.neg)) throw NumericalError("scorer produced a non-finite logit");
  }
  return EdgeLogits(n, std::move(feats));
}

void accumulate_parameter_gradient(const ScorerModel& model, std::span<const Point> nodes,
                                   std::span<const LogitPair> logit_grad, std::span<double> grad) {
  const std::size_t n = nodes.size();
  const std::size_t h = model.hidden();
  if (logit_grad.size() != pair_count(n)) throw InputError("logit gradient has wrong size");
  if (grad.size() != model.params().size()) throw InputError("gradient buffer has wrong size");

  const auto gain = model.ln_gain();
  const auto w2 = model.w2();
  double* g_w1 = grad.data();
  double* g_b1 = g_w1 + 7 * h;
  double* g_gain = g_w1 + 8 * h;
  double* g_bias = g_w1 + 9 * h;
  double* g_w2 = g_w1 + 10 * h;
  double* g_b2 = g_w1 + 12 * h;

  PairActivations act(h);
  std::vector<double> g_normed(h);
  for_each_pair(n, [&](std::size_t k, std::size_t i, std::size_t j) {
    const LogitPair g = logit_grad[k];
    if (g.pos == 0.0 && g.neg == 0.0) return;
    const PairFeatures x = pair_features(nodes, i, j);
    forward(model, x, act);

    g_b2[0] += g.pos;
    g_b2[1] += g.neg;
    double mean_g = 0.0;
    double mean_gx = 0.0;
    for (std::size_t u = 0; u < h; ++u) {
      g_w2[u] += g.pos * act.out[u];
      g_w2[h + u] += g.neg * act.out[u];
      const double g_out = g.pos * w2[u] + g.neg * w2[h + u];
      g_gain[u] += g_out * act.normed[u];
      g_bias[u] += g_out;
      g_normed[u] = g_out * gain[u];
      mean_g += g_normed[u];
      mean_gx += g_normed[u] * act.normed[u];
    }
    mean_g /= static_cast<double>(h);
    mean_gx /= static_cast<double>(h);
    for (std::size_t u = 0; u < h; ++u) {
      if (act.z[u] <= 0.0) continue;
      const double g_z = act.inv_std * (g_normed[u] - mean_g - act.normed[u] * mean_gx);
      g_b1[u] += g_z;
      double* row = g_w1 + u * kPairFeatureDim;
      for (std::size_t c = 0; c < kPairFeatureDim; ++c) row[c] += g_z * x[c];
    }
  });
}

double min_preactivation_margin(const ScorerModel& model, std::span<const Point> nodes) {
  double margin = std::numeric_limits<double>::infinity();
  PairActivations act(model.hidden());
  for_each_pair(nodes.size(), [&](std::size_t, std::size_t i, std::size_t j) {
    forward(model, pair_features(nodes, i, j), act);
    for (double z : act.z) margin = std::min(margin, std::abs(z));
  });
  return margin;
}

nlohmann::ordered_json model_to_json(const ScorerModel& model) {
  const std::size_t h = model.hidden();
  auto vec = [](std::span<const double> v) { return nlohmann::ordered_json(std::vector<double>(v.begin(), v.end())); };
  auto mat = [](std::span<const double> v, std::size_t rows, std::size_t cols) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = v.subspan(r * cols, cols);
      out.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return out;
  };
  nlohmann::ordered_json j;
  j["arch"] = {{"in", kPairFeatureDim}, {"hidden", h}};
  j["w1"] = mat(model.w1(), h, kPairFeatureDim);
  j["b1"] = vec(model.b1());
  j["ln_gain"] = vec(model.ln_gain());
  j["ln_bias"] = vec(model.ln_bias());
  j["w2"] = mat(model.w2(), 2, h);
  j["b2"] = vec(model.b2());
  return j;
}

namespace {

void read_vector(const nlohmann::json& j, const char* key, std::span<double> dst) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != dst.size()) {
    throw ParseError(key, "expected an array of " + std::to_string(dst.size()) + " numbers");
  }
  for (std::size_t k = 0; k < dst.size(); ++k) {
    const auto& v = j[key][k];
    if (!v.is_number()) throw ParseError(std::string(key) + "[" + std::to_string(k) + "]", "not a number");
    dst[k] = v.get<double>();
    if (!std::isfinite(dst[k])) {
      throw ParseError(std::string(key) + "[" + std::to_string(k) + "]", "not finite");
    }
  }
}

void read_matrix(const nlohmann::json& j, const char* key, std::size_t rows, std::size_t cols,
                 std::span<double> dst) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != rows) {
    throw ParseError(key, "expected " + std::to_string(rows) + " rows");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[key][r];
    const std::string field = std::string(key) + "[" + std::to_string(r) + "]";
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(field, "expected " + std::to_string(cols) + " columns");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ParseError(field + "[" + std::to_string(c) + "]", "not a number");
      const double v = row[c].get<double>();
      if (!std::isfinite(v)) throw ParseError(field + "[" + std::to_string(c) + "]", "not finite");
      dst[r * cols + c] = v;
    }
  }
}

}  // namespace

ScorerModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  if (!j.contains("arch") || !j["arch"].is_object()) throw ParseError("arch", "missing object");
  const auto& arch = j["arch"];
  if (!arch.contains("in") || !arch["in"].is_number_unsigned() ||
      arch["in"].get<std::size_t>() != kPairFeatureDim) {
    throw ParseError("arch.in", "must be " + std::to_string(kPairFeatureDim));
  }
  if (!arch.contains("hidden") || !arch["hidden"].is_number_unsigned() ||
      arch["hidden"].get<std::size_t>() == 0) {
    throw ParseError("arch.hidden", "must be a positive integer");
  }
  const auto h = arch["hidden"].get<std::size_t>();
  ScorerModel m(h);
  read_matrix(j, "w1", h, kPairFeatureDim, m.w1());
  read_vector(j, "b1", m.b1());
  read_vector(j, "ln_gain", m.ln_gain());
  read_vector(j, "ln_bias", m.ln_bias());
  read_matrix(j, "w2", 2, h, m.w2());
  read_vector(j, "b2", m.b2());
  return m;
}

}  // namespace tcg
