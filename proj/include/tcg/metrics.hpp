#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcg/graph.hpp"

namespace tcg {

// K points with uniform mass 1/K lying on a graph's edges.
struct PointCloud {
  std::vector<Point> points;
  bool degenerate = false;  // edgeless graph: K copies of the node centroid
};

// Points at arc-length positions (l + 0.5) * L / K, l = 0..K-1, along the
// edges concatenated in canonical order, each edge walked from i to j.
// Throws InputError for K == 0 or a graph without nodes.
PointCloud sample_edge_points(const SpatialGraph& g, std::size_t k);

// Mean squared-Euclidean cost of the optimal one-to-one matching between the
// two K-point clouds.
double smd(const SpatialGraph& pred, const SpatialGraph& gt, std::size_t k = 100);

// Same quantity directly on two equal-size clouds.
double cloud_transport_cost(std::span<const Point> a, std::span<const Point> b);

struct TopoScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::size_t true_positives = 0;
  std::size_t pred_keypoints = 0;
  std::size_t gt_keypoints = 0;
};

// Keypoints (degree != 2) matched one-to-one within `radius`, maximizing the
// number of matches and then minimizing total distance. A match counts when
// both nodes have the same degree.
TopoScore topo_score(const SpatialGraph& pred, const SpatialGraph& gt, double radius = 0.01);

// Fraction of graphs passing is_tree. Throws InputError on an empty list.
double tree_rate(std::span<const SpatialGraph> graphs);

struct MetricsConfig {
  std::size_t k_points = 100;
  double topo_radius = 0.01;
  unsigned threads = 1;
};

struct SampleMetrics {
  std::string name;
  double smd = 0.0;
  TopoScore topo;
  bool tree = false;
  bool degenerate_cloud = false;
};

struct MetricsReport {
  double smd = 0.0;
  double topo_precision = 0.0;
  double topo_recall = 0.0;
  double topo_f1 = 0.0;
  double tree_rate = 0.0;
  std::size_t n = 0;
  std::vector<SampleMetrics> samples;
};

// Per-sample metrics for aligned prediction / ground-truth lists, aggregated
// in list order.
MetricsReport evaluate_graphs(std::span<const SpatialGraph> preds, std::span<const SpatialGraph> gts,
                              std::span<const std::string> names, const MetricsConfig& cfg);

// Pairs *.json files by name. Throws InputError listing orphans on either
// side; ParseError naming a malformed file.
MetricsReport evaluate_dataset(const std::filesystem::path& pred_dir,
                               const std::filesystem::path& gt_dir, const MetricsConfig& cfg);

nlohmann::ordered_json sample_metrics_to_json(const SampleMetrics& s);
nlohmann::ordered_json report_to_json(const MetricsReport& r);
// One compact JSON record per sample, newline-terminated.
std::string samples_to_jsonl(const MetricsReport& r);

}  // namespace tcg
