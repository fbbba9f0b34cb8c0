#include "tcg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tcg/assignment.hpp"
#include "tcg/errors.hpp"
#include "tcg/io.hpp"
#include "tcg/parallel.hpp"

namespace tcg {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double sq_dist(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

PointCloud sample_edge_points(const SpatialGraph& g, std::size_t k) {
  if (k == 0) throw InputError("sample count must be positive");
  if (g.node_count() == 0) throw InputError("cannot sample points from an empty graph");

  PointCloud cloud;
  cloud.points.reserve(k);
  const auto& nodes = g.nodes();
  if (g.edges().empty()) {
    Point c;
    for (const Point& p : nodes) {
      c.x += p.x;
      c.y += p.y;
    }
    c.x /= static_cast<double>(nodes.size());
    c.y /= static_cast<double>(nodes.size());
    cloud.points.assign(k, c);
    cloud.degenerate = true;
    return cloud;
  }

  std::vector<double> lengths;
  lengths.reserve(g.edge_count());
  double total = 0.0;
  for (const Edge& e : g.edges()) {
    lengths.push_back(dist(nodes[e.i], nodes[e.j]));
    total += lengths.back();
  }
  if (total == 0.0) {
    // Every edge joins coincident nodes; all mass sits on the first of them.
    cloud.points.assign(k, nodes[g.edges().begin()->i]);
    return cloud;
  }

  auto edge_it = g.edges().begin();
  std::size_t edge_idx = 0;
  double start = 0.0;  // arc length at the start of the current edge
  for (std::size_t l = 0; l < k; ++l) {
    const double s = (static_cast<double>(l) + 0.5) * total / static_cast<double>(k);
    while (edge_idx + 1 < lengths.size() && s > start + lengths[edge_idx]) {
      start += lengths[edge_idx];
      ++edge_idx;
      ++edge_it;
    }
    const Point& a = nodes[edge_it->i];
    const Point& b = nodes[edge_it->j];
    const double len = lengths[edge_idx];
    const double t = len > 0.0 ? std::clamp((s - start) / len, 0.0, 1.0) : 0.0;
    cloud.points.push_back(Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
  }
  return cloud;
}

double cloud_transport_cost(std::span<const Point> a, std::span<const Point> b) {
  if (a.size() != b.size()) throw InputError("point clouds differ in size");
  const std::size_t k = a.size();
  if (k == 0) return 0.0;
  std::vector<double> cost(k * k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) cost[r * k + c] = sq_dist(a[r], b[c]);
  }
  const auto match = solve_assignment(cost, k, k);
  double total = 0.0;
  for (std::size_t r = 0; r < k; ++r) total += cost[r * k + match[r]];
  return total / static_cast<double>(k);
}

double smd(const SpatialGraph& pred, const SpatialGraph& gt, std::size_t k) {
  const PointCloud a = sample_edge_points(pred, k);
  const PointCloud b = sample_edge_points(gt, k);
  return cloud_transport_cost(a.points, b.points);
}

TopoScore topo_score(const SpatialGraph& pred, const SpatialGraph& gt, double radius) {
  if (!(radius > 0.0)) throw InputError("topo radius must be positive");
  auto keypoints = [](const SpatialGraph& g) {
    std::vector<std::pair<Point, std::size_t>> kp;
    const auto deg = g.degrees();
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      if (deg[v] != 2) kp.emplace_back(g.nodes()[v], deg[v]);
    }
    return kp;
  };
  const auto pk = keypoints(pred);
  const auto gk = keypoints(gt);

  TopoScore s;
  s.pred_keypoints = pk.size();
  s.gt_keypoints = gk.size();

  if (!pk.empty() && !gk.empty()) {
    // Out-of-radius pairs cost more than any complete set of in-radius
    // matches, so the solver maximizes match count before distance.
    const bool pred_rows = pk.size() <= gk.size();
    const auto& rows = pred_rows ? pk : gk;
    const auto& cols = pred_rows ? gk : pk;
    const double forbidden = 2.0 * static_cast<double>(rows.size() + 1) * (radius + 1.0);
    std::vector<double> cost(rows.size() * cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const double d = dist(rows[r].first, cols[c].first);
        cost[r * cols.size() + c] = d <= radius ? d : forbidden;
      }
    }
    const auto match = solve_assignment(cost, rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t c = match[r];
      if (cost[r * cols.size() + c] > radius) continue;
      if (rows[r].second == cols[c].second) ++s.true_positives;
    }
  }

  const auto tp = static_cast<double>(s.true_positives);
  s.precision = pk.empty() ? 1.0 : tp / static_cast<double>(pk.size());
  s.recall = gk.empty() ? 1.0 : tp / static_cast<double>(gk.size());
  s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
  return s;
}

double tree_rate(std::span<const SpatialGraph> graphs) {
  if (graphs.empty()) throw InputError("tree rate of an empty list");
  const auto trees = std::count_if(graphs.begin(), graphs.end(),
                                   [](const SpatialGraph& g) { return is_tree(g); });
  return static_cast<double>(trees) / static_cast<double>(graphs.size());
}

MetricsReport evaluate_graphs(std::span<const SpatialGraph> preds, std::span<const SpatialGraph> gts,
                              std::span<const std::string> names, const MetricsConfig& cfg) {
  if (preds.size() != gts.size() || names.size() != gts.size()) {
    throw InputError("prediction / ground-truth / name lists differ in length");
  }
  if (gts.empty()) throw InputError("nothing to evaluate");

  MetricsReport report;
  report.n = gts.size();
  report.samples.resize(gts.size());
  parallel_for(gts.size(), cfg.threads, [&](std::size_t i) {
    SampleMetrics& m = report.samples[i];
    m.name = names[i];
    const PointCloud a = sample_edge_points(preds[i], cfg.k_points);
    const PointCloud b = sample_edge_points(gts[i], cfg.k_points);
    m.smd = cloud_transport_cost(a.points, b.points);
    m.degenerate_cloud = a.degenerate;
    m.topo = topo_score(preds[i], gts[i], cfg.topo_radius);
    m.tree = is_tree(preds[i]);
  });

  std::size_t trees = 0;
  for (const SampleMetrics& m : report.samples) {
    report.smd += m.smd;
    report.topo_precision += m.topo.precision;
    report.topo_recall += m.topo.recall;
    report.topo_f1 += m.topo.f1;
    trees += m.tree ? 1 : 0;
  }
  const auto n = static_cast<double>(report.n);
  report.smd /= n;
  report.topo_precision /= n;
  report.topo_recall /= n;
  report.topo_f1 /= n;
  report.tree_rate = static_cast<double>(trees) / n;
  return report;
}

MetricsReport evaluate_dataset(const std::filesystem::path& pred_dir,
                               const std::filesystem::path& gt_dir, const MetricsConfig& cfg) {
  const auto pred_files = list_graph_files(pred_dir);
  const auto gt_files = list_graph_files(gt_dir);

  std::vector<std::string> orphans;
  for (const auto& [name, _] : pred_files) {
    if (!gt_files.contains(name)) orphans.push_back("pred/" + name);
  }
  for (const auto& [name, _] : gt_files) {
    if (!pred_files.contains(name)) orphans.push_back("gt/" + name);
  }
  if (!orphans.empty()) {
    std::string msg = "files without a counterpart:";
    for (const auto& o : orphans) msg += " " + o;
    throw InputError(msg);
  }

  std::vector<std::string> names;
  for (const auto& [name, _] : gt_files) names.push_back(name);
  std::vector<SpatialGraph> preds(names.size()), gts(names.size());
  parallel_for(names.size(), cfg.threads, [&](std::size_t i) {
    preds[i] = load_graph(pred_files.at(names[i]));
    gts[i] = load_graph(gt_files.at(names[i]));
  });
  return evaluate_graphs(preds, gts, names, cfg);
}

nlohmann::ordered_json sample_metrics_to_json(const SampleMetrics& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["smd"] = s.smd;
  j["topo_precision"] = s.topo.precision;
  j["topo_recall"] = s.topo.recall;
  j["topo_f1"] = s.topo.f1;
  j["tree"] = s.tree;
  j["pred_keypoints"] = s.topo.pred_keypoints;
  j["gt_keypoints"] = s.topo.gt_keypoints;
  j["true_positives"] = s.topo.true_positives;
  if (s.degenerate_cloud) j["degenerate_cloud"] = true;
  return j;
}

nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json agg;
  agg["smd"] = r.smd;
  agg["topo_precision"] = r.topo_precision;
  agg["topo_recall"] = r.topo_recall;
  agg["topo_f1"] = r.topo_f1;
  agg["tree_rate"] = r.tree_rate;
  agg["n"] = r.n;
  nlohmann::ordered_json samples = nlohmann::ordered_json::array();
  for (const auto& s : r.samples) samples.push_back(sample_metrics_to_json(s));
  nlohmann::ordered_json out;
  out["aggregate"] = std::move(agg);
  out["samples"] = std::move(samples);
  return out;
}

std::string samples_to_jsonl(const MetricsReport& r) {
  std::string out;
  for (const auto& s : r.samples) out += sample_metrics_to_json(s).dump() + "\n";
  return out;
}

}  // namespace tcg
