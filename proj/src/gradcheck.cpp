#include "tcg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "tcg/errors.hpp"
#include "tcg/mst.hpp"
#include "tcg/pairs.hpp"
#include "tcg/rng.hpp"
#include "tcg/scorer.hpp"
#include "tcg/sfs.hpp"
#include "tcg/training.hpp"

namespace tcg {

namespace {

constexpr std::uint64_t kGradcheckStream = 0x4743;

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::vector<Target> random_tree_targets(std::size_t n, Rng& rng) {
  EdgeSet tree;
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    tree.insert(make_edge(static_cast<NodeId>(parent(rng)), static_cast<NodeId>(v)));
  }
  return targets_from_edges(n, tree);
}

double constrained_sum(const std::vector<LogitPair>& f, const std::vector<Suppression>& s,
                       const std::vector<Target>& t, double lambda) {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += cross_entropy(suppress(f[k], s[k], lambda), t[k]);
  return sum;
}

// sfs_backward against central differences of sum CE over random logits with
// the delta a projection of those logits produces.
void check_logits(const GradcheckConfig& cfg, std::size_t index, GradcheckReport& rep) {
  Rng rng(derive_seed(cfg.seed, kGradcheckStream, 2 * index));
  std::uniform_int_distribution<std::size_t> pick_n(2, std::max<std::size_t>(2, cfg.max_nodes));
  std::normal_distribution<double> logit(0.0, 2.0);
  std::bernoulli_distribution edge(0.3);
  const std::size_t n = pick_n(rng);
  std::vector<LogitPair> f(pair_count(n));
  for (auto& p : f) p = {logit(rng), logit(rng)};
  std::vector<Target> t(f.size());
  for (auto& x : t) x = edge(rng) ? Target{1.0, 0.0} : Target{0.0, 1.0};

  const EdgeLogits logits(n, f);
  const Projection proj = project(softmax_all(logits));
  const SfsConfig sfs{cfg.lambda};
  const auto grad = sfs_backward(logits, proj.delta, t, sfs);
  const auto s = suppression_map(n, proj.delta);

  for (std::size_t k = 0; k < f.size(); ++k) {
    for (int c = 0; c < 2; ++c) {
      auto plus = f, minus = f;
      double& vp = c == 0 ? plus[k].pos : plus[k].neg;
      double& vm = c == 0 ? minus[k].pos : minus[k].neg;
      vp += cfg.logit_step;
      vm -= cfg.logit_step;
      const double fd = (constrained_sum(plus, s, t, cfg.lambda) - constrained_sum(minus, s, t, cfg.lambda)) /
                        (2.0 * cfg.logit_step);
      const double an = c == 0 ? grad[k].pos : grad[k].neg;
      rep.max_rel_err_logits = std::max(rep.max_rel_err_logits, rel_err(an, fd, cfg.rel_floor));
      const bool suppressed = (c == 0 && s[k] == Suppression::positive) ||
                              (c == 1 && s[k] == Suppression::negative);
      if (suppressed && an != 0.0) ++rep.nonzero_suppressed;
    }
  }
}

// Parameter gradient of the full edge loss (both terms) on a node instance,
// delta held at its value for the unperturbed parameters.
void check_parameters(const GradcheckConfig& cfg, std::size_t index, GradcheckReport& rep) {
  Rng rng(derive_seed(cfg.seed, kGradcheckStream, 2 * index + 1));
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.1);
  const std::size_t n = std::max<std::size_t>(2, cfg.max_nodes);
  const double kink_margin = 10.0 * cfg.param_step * 2.0;

  std::vector<Point> nodes(n);
  ScorerModel model;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) throw NumericalError("gradcheck: could not draw an instance away from ReLU kinks");
    for (auto& p : nodes) p = {coord(rng), coord(rng)};
    model = ScorerModel::initialize(cfg.hidden, rng());
    for (double& p : model.params()) p += jitter(rng);
    if (min_preactivation_margin(model, nodes) > kink_margin) break;
    ++rep.resampled;
  }
  const auto targets = random_tree_targets(n, rng);
  const double w = positive_pair_weight(targets, 0.0);
  const Projection proj = project(softmax_all(score_edges(model, nodes)));

  const SampleLoss base = sample_loss(model, nodes, targets, &proj.delta, w, cfg.lambda);
  auto params = model.params();
  for (std::size_t p = 0; p < params.size(); ++p) {
    const double saved = params[p];
    params[p] = saved + cfg.param_step;
    const double up = edge_loss(score_edges(model, nodes), &proj.delta, targets, w, cfg.lambda).loss.l_edge;
    params[p] = saved - cfg.param_step;
    const double down = edge_loss(score_edges(model, nodes), &proj.delta, targets, w, cfg.lambda).loss.l_edge;
    params[p] = saved;
    const double fd = (up - down) / (2.0 * cfg.param_step);
    rep.max_rel_err_parameters = std::max(rep.max_rel_err_parameters, rel_err(base.grad[p], fd, cfg.rel_floor));
  }
}

struct CaseSpec {
  int row;
  bool positive_sign;
  Suppression s;
  Target t;
  const char* grad_pos;
  const char* grad_neg;
  bool up_pos;
  bool up_neg;
};

constexpr CaseSpec kCases[] = {
    {1, true, Suppression::none, {1, 0}, "y+ - 1", "y-", false, false},
    {2, true, Suppression::none, {0, 1}, "y+", "y- - 1", true, true},
    {3, true, Suppression::positive, {1, 0}, "0", "1", false, true},
    {4, true, Suppression::positive, {0, 1}, "0", "0", false, false},
    {5, false, Suppression::none, {1, 0}, "y+ - 1", "y-", true, true},
    {6, false, Suppression::none, {0, 1}, "y+", "y- - 1", false, false},
    {7, false, Suppression::negative, {1, 0}, "0", "0", false, false},
    {8, false, Suppression::negative, {0, 1}, "1", "0", true, false},
};

const char* suppression_label(Suppression s) {
  switch (s) {
    case Suppression::negative:
      return "E+";
    case Suppression::positive:
      return "E-";
    case Suppression::none:
      break;
  }
  return "none";
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Checks one instance of a row; returns an empty string when it conforms.
std::string check_case_instance(const CaseSpec& c, const LogitPair& f, double lambda) {
  char buf[160];
  if (classify_case(f, c.s, c.t) != c.row) return "classified as another row";
  const LogitPair exact = sfs_pair_gradient(f, c.s, c.t, lambda);
  const LogitPair approx = approximate_pair_gradient(f, c.s, c.t);
  if (c.s == Suppression::positive && exact.pos != 0.0) return "suppressed f+ has a gradient";
  if (c.s == Suppression::negative && exact.neg != 0.0) return "suppressed f- has a gradient";

  // Dropping epsilon changes the surviving coordinate by at most
  // exp(-lambda) * exp(-surviving logit).
  double bound = 0.0;
  if (c.s == Suppression::positive) bound = std::exp(-lambda - f.neg);
  if (c.s == Suppression::negative) bound = std::exp(-lambda - f.pos);
  if (std::abs(exact.pos - approx.pos) > bound || std::abs(exact.neg - approx.neg) > bound) {
    std::snprintf(buf, sizeof buf, "exact (%.3g, %.3g) too far from approximate (%.3g, %.3g)",
                  exact.pos, exact.neg, approx.pos, approx.neg);
    return buf;
  }
  if (c.s != Suppression::none) {
    // Zero entries of the approximate form must be within the bound; the
    // others must keep their sign.
    if ((approx.pos != 0.0 && sign_of(exact.pos) != sign_of(approx.pos)) ||
        (approx.neg != 0.0 && sign_of(exact.neg) != sign_of(approx.neg))) {
      return "sign differs from the approximate derivative";
    }
  } else {
    const ProbPair y = softmax2(f);
    if (sign_of(exact.pos) != sign_of(y.pos - c.t.pos) || sign_of(exact.neg) != sign_of(y.neg - c.t.neg)) {
      return "sign differs from y - t";
    }
  }
  if ((std::abs(exact.pos) > 0.5) != c.up_pos || (std::abs(exact.neg) > 0.5) != c.up_neg) {
    std::snprintf(buf, sizeof buf, "magnitudes (%.3g, %.3g) disagree with the arrows", std::abs(exact.pos),
                  std::abs(exact.neg));
    return buf;
  }
  if (c.row == 3 || c.row == 8) {
    const LogitPair u = unconstrained_pair_gradient(f, c.t);
    const double un = std::hypot(u.pos, u.neg);
    const double cn = std::hypot(exact.pos, exact.neg);
    const double survivor = c.row == 3 ? f.neg : f.pos;
    const double floor = 1.0 - std::exp(-lambda) * std::exp(-survivor);
    if (!(cn >= floor && floor > un && un < std::sqrt(0.5))) {
      std::snprintf(buf, sizeof buf, "norms constrained %.6g, bound %.6g, unconstrained %.6g", cn, floor, un);
      return buf;
    }
  }
  return {};
}

CaseRow check_case(const CaseSpec& c, const GradcheckConfig& cfg) {
  CaseRow row;
  row.row = c.row;
  row.sign = c.positive_sign ? "f+ > f-" : "f+ < f-";
  row.suppression = suppression_label(c.s);
  row.target = c.t.pos == 1.0 ? "[1,0]" : "[0,1]";
  row.grad_pos = c.grad_pos;
  row.grad_neg = c.grad_neg;
  row.arrows = std::string(c.up_pos ? "up" : "down") + "/" + (c.up_neg ? "up" : "down");
  Rng rng(derive_seed(cfg.seed, kGradcheckStream ^ 0xCA5E, static_cast<std::uint64_t>(c.row)));
  std::uniform_real_distribution<double> logit(-3.0, 3.0);
  while (row.instances < cfg.case_instances) {
    LogitPair f{logit(rng), logit(rng)};
    if (std::abs(f.pos - f.neg) < 1e-3 || (f.pos > f.neg) != c.positive_sign) continue;
    ++row.instances;
    const std::string why = check_case_instance(c, f, cfg.lambda);
    if (!why.empty() && row.failures++ == 0) row.first_failure = why;
  }
  return row;
}

}  // namespace

double GradcheckReport::max_rel_err() const {
  return std::max(max_rel_err_logits, max_rel_err_parameters);
}

bool GradcheckReport::cases_pass() const {
  return cases.size() == 8 &&
         std::all_of(cases.begin(), cases.end(), [](const CaseRow& r) { return r.failures == 0; });
}

bool GradcheckReport::pass() const {
  return max_rel_err() <= tolerance && nonzero_suppressed == 0 && cases_pass();
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  if (cfg.configs == 0) throw InputError("gradcheck needs at least one configuration");
  if (cfg.max_nodes < 2) throw InputError("gradcheck needs at least two nodes");
  if (cfg.hidden == 0) throw InputError("gradcheck needs a hidden width");
  if (!(cfg.logit_step > 0.0) || !(cfg.param_step > 0.0)) throw InputError("step sizes must be positive");
  SfsConfig{cfg.lambda}.validate();
  GradcheckReport rep;
  rep.configs = cfg.configs;
  rep.tolerance = cfg.tolerance;
  for (std::size_t i = 0; i < cfg.configs; ++i) {
    check_logits(cfg, i, rep);
    check_parameters(cfg, i, rep);
  }
  for (const CaseSpec& c : kCases) rep.cases.push_back(check_case(c, cfg));
  return rep;
}

std::string format_gradcheck(const GradcheckReport& r) {
  std::string out;
  char buf[320];
  std::snprintf(buf, sizeof buf, "%-4s %-8s %-5s %-6s %-8s %-8s %-10s %s\n", "case", "sign", "supp",
                "target", "dL/df+", "dL/df-", "|dL/df|", "verdict");
  out += buf;
  for (const CaseRow& c : r.cases) {
    std::snprintf(buf, sizeof buf, "%-4d %-8s %-5s %-6s %-8s %-8s %-10s %s (%zu/%zu)%s%s\n", c.row,
                  c.sign.c_str(), c.suppression.c_str(), c.target.c_str(), c.grad_pos.c_str(),
                  c.grad_neg.c_str(), c.arrows.c_str(), c.failures == 0 ? "ok" : "FAIL",
                  c.instances - c.failures, c.instances, c.failures == 0 ? "" : ": ",
                  c.first_failure.c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "configs %zu, logit max rel err %.3e, parameter max rel err %.3e, "
                "non-zero suppressed gradients %zu\n",
                r.configs, r.max_rel_err_logits, r.max_rel_err_parameters, r.nonzero_suppressed);
  out += buf;
  std::snprintf(buf, sizeof buf, "%s, max rel err %.3e (tolerance %.0e)\n", r.pass() ? "PASS" : "FAIL",
                r.max_rel_err(), r.tolerance);
  out += buf;
  return out;
}

std::string format_lambda_table(const std::vector<double>& lambdas) {
  std::string out;
  char buf[96];
  for (double l : lambdas) {
    std::snprintf(buf, sizeof buf, "lambda=%g exp(-lambda)=%s\n", l, format_suppression_floor(l).c_str());
    out += buf;
  }
  return out;
}

}  // namespace tcg
