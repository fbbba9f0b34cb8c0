#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcg/graph.hpp"
#include "tcg/rng.hpp"

namespace tcg {

// Bracketed L-system over {F, A, +, -, [, ]}. F draws a fixed segment, A is a
// leaf segment that rewriting replaces, + / - turn, [ / ] push / pop.
struct LSystemSpec {
  std::vector<std::string> axioms{"F[+A]A", "F[-A]A", "F[+A]F[-A]A"};
  std::vector<std::string> rules{"F[+A]",  "F[-A]",  "F[+A][-A]", "F[+A]A",
                                 "F[-A]A", "FF[+A]", "FF[-A]",    "F[+A][-A]A"};
  int max_iterations = 3;
  std::pair<double, double> length_scale_range{0.5, 2.5};
  std::pair<double, double> angle_range_deg{10.0, 35.0};
  std::size_t max_nodes = 100;  // samples must have fewer nodes
  double canvas_px = 512.0;
  double base_length_px = 32.0;
  double margin_px = 16.0;
  double resample_px = 0.0;  // 0 keeps the turtle vertices
  std::size_t max_attempts = 1000;

  // Throws ParseError naming the offending field.
  void validate() const;
};

nlohmann::ordered_json lsystem_spec_to_json(const LSystemSpec& spec);
// Missing keys keep their defaults. Throws ParseError naming the field.
LSystemSpec lsystem_spec_from_json(const nlohmann::json& j);
LSystemSpec load_lsystem_spec(const std::filesystem::path& path);
std::string lsystem_spec_hash(const LSystemSpec& spec);

// A symbol with the number of rewrites that produced it (the digit in
// "F0[+A1]"). Turn and bracket symbols carry no generation.
struct Symbol {
  char kind = 'F';
  int generation = 0;

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Sequence = std::vector<Symbol>;

// Parses "F0[+A0]A0" or "F[+A]A" (missing digits mean `generation`).
// Accepts U+2212 as '-'. Throws InputError on unknown symbols or unbalanced
// brackets.
Sequence parse_sequence(std::string_view text, int generation = 0);
std::string to_string(const Sequence& seq);

// Replaces every A (generation g) by a uniformly drawn rule expansion whose F
// and A symbols get generation g + 1. Other symbols are copied.
Sequence rewrite(const Sequence& seq, std::span<const Sequence> rules, Rng& rng);

struct Interpretation {
  SpatialGraph graph;  // normalized to [0,1]^2
  std::vector<double> length_factors;
  std::vector<double> turn_angles_deg;
  bool rejected = false;  // node cap reached; graph is empty
};

// Turtle interpretation starting upward from the origin. Each F or A adds one
// node and one edge; the result is fit into the canvas (uniformly scaled down
// only when it exceeds the area inside the margin), centered, and divided by
// the canvas size.
Interpretation interpret(const Sequence& seq, Rng& rng, const LSystemSpec& spec);

// Keeps every node of degree != 2, then walks each chain between keypoints
// from its lower-id end and places a node every `interval_px` of arc length
// (coordinates scaled by canvas_px). Chain vertices where the polyline turns
// are kept so the geometry is unchanged. Throws InputError for a non-tree or
// interval <= 0.
SpatialGraph resample_nodes(const SpatialGraph& g, double interval_px, double canvas_px);

struct GeneratedSample {
  SpatialGraph graph;
  std::string sequence;
  int iterations = 0;
  std::size_t attempts = 0;
  std::vector<double> length_factors;
  std::vector<double> turn_angles_deg;
};

// Sample `index` of the dataset seeded by `seed`; rejection-samples until the
// node cap holds.
GeneratedSample generate_sample(const LSystemSpec& spec, std::uint64_t seed, std::size_t index);

struct DatasetOptions {
  bool render = false;
  double stroke_px = 2.0;
  unsigned threads = 1;
};

// Writes out_dir/graphs/NNNNNN.json, optional out_dir/images/NNNNNN.png and
// out_dir/manifest.json; returns the manifest.
nlohmann::ordered_json generate_dataset(const LSystemSpec& spec, std::size_t count,
                                        std::uint64_t seed, const std::filesystem::path& out_dir,
                                        const DatasetOptions& options = {});

// Loads the graphs listed in a dataset manifest, in manifest order.
std::vector<SpatialGraph> load_dataset(const std::filesystem::path& dir);

}  // namespace tcg
