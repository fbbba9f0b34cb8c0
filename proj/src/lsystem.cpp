#include "tcg/lsystem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tcg/errors.hpp"
#include "tcg/io.hpp"
#include "tcg/parallel.hpp"
#include "tcg/raster.hpp"

namespace tcg {

namespace {

bool is_drawing(char c) { return c == 'F' || c == 'A'; }

void check_range(const std::pair<double, double>& r, const char* field, double lo_min) {
  if (!std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second ||
      r.first < lo_min) {
    throw ParseError(field, "expected an ordered range [low, high] with low >= " +
                                std::to_string(lo_min));
  }
}

}  // namespace

void LSystemSpec::validate() const {
  if (axioms.empty()) throw ParseError("axioms", "at least one axiom required");
  if (rules.empty()) throw ParseError("rules", "at least one rule required");
  for (std::size_t k = 0; k < axioms.size(); ++k) {
    try {
      parse_sequence(axioms[k]);
    } catch (const InputError& e) {
      throw ParseError("axioms[" + std::to_string(k) + "]", e.what());
    }
  }
  for (std::size_t k = 0; k < rules.size(); ++k) {
    try {
      parse_sequence(rules[k]);
    } catch (const InputError& e) {
      throw ParseError("rules[" + std::to_string(k) + "]", e.what());
    }
  }
  if (max_iterations < 0) throw ParseError("max_iterations", "must be >= 0");
  check_range(length_scale_range, "length_scale_range", 0.0);
  if (length_scale_range.first <= 0.0) throw ParseError("length_scale_range", "must be positive");
  check_range(angle_range_deg, "angle_range_deg", 0.0);
  if (max_nodes < 3) throw ParseError("max_nodes", "must be at least 3");
  if (!(canvas_px > 0.0)) throw ParseError("canvas_px", "must be positive");
  if (!(base_length_px > 0.0)) throw ParseError("base_length_px", "must be positive");
  if (!(margin_px >= 0.0) || 2.0 * margin_px >= canvas_px) {
    throw ParseError("margin_px", "must be non-negative and leave room on the canvas");
  }
  if (!(resample_px >= 0.0)) throw ParseError("resample_px", "must be >= 0");
  if (max_attempts == 0) throw ParseError("max_attempts", "must be positive");
}

nlohmann::ordered_json lsystem_spec_to_json(const LSystemSpec& spec) {
  nlohmann::ordered_json j;
  j["axioms"] = spec.axioms;
  j["rules"] = spec.rules;
  j["max_iterations"] = spec.max_iterations;
  j["length_scale_range"] = {spec.length_scale_range.first, spec.length_scale_range.second};
  j["angle_range_deg"] = {spec.angle_range_deg.first, spec.angle_range_deg.second};
  j["max_nodes"] = spec.max_nodes;
  j["canvas_px"] = spec.canvas_px;
  j["base_length_px"] = spec.base_length_px;
  j["margin_px"] = spec.margin_px;
  j["resample_px"] = spec.resample_px;
  j["max_attempts"] = spec.max_attempts;
  return j;
}

LSystemSpec lsystem_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  LSystemSpec spec;
  auto strings = [&](const char* key, std::vector<std::string>& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw ParseError(key, "expected an array of strings");
    dst.clear();
    for (std::size_t k = 0; k < j[key].size(); ++k) {
      if (!j[key][k].is_string()) {
        throw ParseError(std::string(key) + "[" + std::to_string(k) + "]", "not a string");
      }
      dst.push_back(j[key][k].get<std::string>());
    }
  };
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ParseError(key, "not a number");
    dst = j[key].get<double>();
  };
  auto count = [&](const char* key, std::size_t& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) throw ParseError(key, "not a non-negative integer");
    dst = j[key].get<std::size_t>();
  };
  auto range = [&](const char* key, std::pair<double, double>& dst) {
    if (!j.contains(key)) return;
    const auto& r = j[key];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
      throw ParseError(key, "expected [low, high]");
    }
    dst = {r[0].get<double>(), r[1].get<double>()};
  };
  strings("axioms", spec.axioms);
  strings("rules", spec.rules);
  if (j.contains("max_iterations")) {
    if (!j["max_iterations"].is_number_integer()) throw ParseError("max_iterations", "not an integer");
    spec.max_iterations = j["max_iterations"].get<int>();
  }
  range("length_scale_range", spec.length_scale_range);
  range("angle_range_deg", spec.angle_range_deg);
  count("max_nodes", spec.max_nodes);
  number("canvas_px", spec.canvas_px);
  number("base_length_px", spec.base_length_px);
  number("margin_px", spec.margin_px);
  number("resample_px", spec.resample_px);
  count("max_attempts", spec.max_attempts);
  spec.validate();
  return spec;
}

LSystemSpec load_lsystem_spec(const std::filesystem::path& path) {
  const nlohmann::json j = read_json_file(path);
  try {
    return lsystem_spec_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

std::string lsystem_spec_hash(const LSystemSpec& spec) {
  return fnv1a_hex(lsystem_spec_to_json(spec).dump());
}

Sequence parse_sequence(std::string_view text, int generation) {
  static constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";
  Sequence seq;
  int depth = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    if (text.substr(pos, kUnicodeMinus.size()) == kUnicodeMinus) {
      seq.push_back({'-', 0});
      pos += kUnicodeMinus.size();
      continue;
    }
    const char c = text[pos++];
    switch (c) {
      case 'F':
      case 'A': {
        int gen = generation;
        if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
          gen = 0;
          while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            gen = gen * 10 + (text[pos++] - '0');
          }
        }
        seq.push_back({c, gen});
        break;
      }
      case '+':
      case '-':
        seq.push_back({c, 0});
        break;
      case '[':
        ++depth;
        seq.push_back({c, 0});
        break;
      case ']':
        if (--depth < 0) throw InputError("unbalanced ']' in '" + std::string(text) + "'");
        seq.push_back({c, 0});
        break;
      case ' ':
        break;
      default:
        throw InputError("unknown symbol '" + std::string(1, c) + "' in '" + std::string(text) + "'");
    }
  }
  if (depth != 0) throw InputError("unbalanced '[' in '" + std::string(text) + "'");
  return seq;
}

std::string to_string(const Sequence& seq) {
  std::string out;
  for (const Symbol& s : seq) {
    out += s.kind;
    if (is_drawing(s.kind)) out += std::to_string(s.generation);
  }
  return out;
}

Sequence rewrite(const Sequence& seq, std::span<const Sequence> rules, Rng& rng) {
  if (rules.empty()) throw InputError("no rewrite rules");
  std::uniform_int_distribution<std::size_t> pick(0, rules.size() - 1);
  Sequence out;
  out.reserve(seq.size() * 2);
  for (const Symbol& s : seq) {
    if (s.kind != 'A') {
      out.push_back(s);
      continue;
    }
    for (Symbol r : rules[pick(rng)]) {
      if (is_drawing(r.kind)) r.generation = s.generation + 1;
      out.push_back(r);
    }
  }
  return out;
}

Interpretation interpret(const Sequence& seq, Rng& rng, const LSystemSpec& spec) {
  Interpretation out;
  const auto segments = static_cast<std::size_t>(
      std::count_if(seq.begin(), seq.end(), [](const Symbol& s) { return is_drawing(s.kind); }));
  if (segments + 1 >= spec.max_nodes) {
    out.rejected = true;
    return out;
  }

  struct Turtle {
    double x = 0.0;
    double y = 0.0;
    double heading = 90.0;  // degrees, counter-clockwise from +x
    NodeId node = 0;
  };
  std::uniform_real_distribution<double> scale(spec.length_scale_range.first,
                                               spec.length_scale_range.second);
  std::uniform_real_distribution<double> turn(spec.angle_range_deg.first,
                                              spec.angle_range_deg.second);

  std::vector<Point> raw{{0.0, 0.0}};
  EdgeSet edges;
  Turtle t;
  std::vector<Turtle> stack;
  for (const Symbol& s : seq) {
    switch (s.kind) {
      case 'F':
      case 'A': {
        const double factor = scale(rng);
        out.length_factors.push_back(factor);
        const double len = spec.base_length_px * factor;
        const double rad = t.heading * std::numbers::pi / 180.0;
        t.x += len * std::cos(rad);
        t.y += len * std::sin(rad);
        const auto id = static_cast<NodeId>(raw.size());
        raw.push_back({t.x, t.y});
        edges.insert(Edge{t.node, id});
        t.node = id;
        break;
      }
      case '+':
      case '-': {
        const double angle = turn(rng);
        out.turn_angles_deg.push_back(angle);
        t.heading += s.kind == '+' ? angle : -angle;
        break;
      }
      case '[':
        stack.push_back(t);
        break;
      case ']':
        if (stack.empty()) throw InputError("unbalanced ']' during interpretation");
        t = stack.back();
        stack.pop_back();
        break;
      default:
        throw InputError("unknown symbol during interpretation");
    }
  }
  if (!stack.empty()) throw InputError("unbalanced '[' during interpretation");

  double min_x = raw[0].x, max_x = raw[0].x, min_y = raw[0].y, max_y = raw[0].y;
  for (const Point& p : raw) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double avail = spec.canvas_px - 2.0 * spec.margin_px;
  const double fit = extent > avail ? avail / extent : 1.0;
  const double cx = 0.5 * (min_x + max_x);
  const double cy = 0.5 * (min_y + max_y);
  std::vector<Point> nodes;
  nodes.reserve(raw.size());
  for (const Point& p : raw) {
    // Image rows grow downward, so the turtle's +y maps to decreasing rows.
    const double px = 0.5 * spec.canvas_px + (p.x - cx) * fit;
    const double py = 0.5 * spec.canvas_px - (p.y - cy) * fit;
    nodes.push_back({std::clamp(px / spec.canvas_px, 0.0, 1.0),
                     std::clamp(py / spec.canvas_px, 0.0, 1.0)});
  }
  out.graph = SpatialGraph(std::move(nodes), std::move(edges));
  return out;
}

SpatialGraph resample_nodes(const SpatialGraph& g, double interval_px, double canvas_px) {
  if (!(interval_px > 0.0)) throw InputError("resample interval must be positive");
  if (!(canvas_px > 0.0)) throw InputError("canvas size must be positive");
  if (!is_tree(g)) throw InputError("resample_nodes requires a tree");
  if (g.node_count() <= 1) return g;

  const auto deg = g.degrees();
  const auto adj = g.adjacency();
  const auto& src = g.nodes();
  const double interval = interval_px / canvas_px;  // normalized units
  const double tol = 1e-9 / canvas_px;

  std::vector<Point> nodes;
  std::vector<NodeId> new_id(g.node_count(), 0);
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (deg[v] != 2) {
      new_id[v] = static_cast<NodeId>(nodes.size());
      nodes.push_back(src[v]);
    }
  }
  EdgeSet edges;

  for (std::size_t start = 0; start < g.node_count(); ++start) {
    if (deg[start] == 2) continue;
    for (NodeId first : adj[start]) {
      std::vector<NodeId> chain{static_cast<NodeId>(start)};
      NodeId prev = static_cast<NodeId>(start);
      NodeId cur = first;
      while (deg[cur] == 2) {
        chain.push_back(cur);
        const NodeId next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
        prev = cur;
        cur = next;
      }
      chain.push_back(cur);
      if (cur < start) continue;  // walked from the other end

      // Vertices that carry geometry: the ends plus interior turns.
      std::vector<Point> poly{src[chain.front()]};
      for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
        const Point& a = poly.back();
        const Point& b = src[chain[k]];
        const Point& c = src[chain[k + 1]];
        const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        const double dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
        if (std::abs(cross) > 1e-15 || dot < 0.0) poly.push_back(b);
      }
      poly.push_back(src[chain.back()]);

      NodeId last = new_id[chain.front()];
      double travelled = 0.0;
      double next_mark = interval;
      auto add_node = [&](const Point& p) {
        const auto id = static_cast<NodeId>(nodes.size());
        nodes.push_back(p);
        edges.insert(make_edge(last, id));
        last = id;
      };
      for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        const Point& a = poly[k];
        const Point& b = poly[k + 1];
        const double len = std::hypot(b.x - a.x, b.y - a.y);
        const bool final_segment = k + 2 == poly.size();
        while (next_mark < travelled + len - tol) {
          const double t = (next_mark - travelled) / len;
          add_node({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
          next_mark += interval;
        }
        travelled += len;
        if (!final_segment) {
          // Keep the turn vertex unless a mark already landed on it.
          const Point& back = nodes[last];
          if (std::hypot(back.x - b.x, back.y - b.y) > tol) add_node(b);
        }
      }
      if (last == new_id[chain.back()]) continue;
      edges.insert(make_edge(last, new_id[chain.back()]));
    }
  }
  return SpatialGraph(std::move(nodes), std::move(edges));
}

GeneratedSample generate_sample(const LSystemSpec& spec, std::uint64_t seed, std::size_t index) {
  Rng rng(derive_seed(seed, streams::kLSystem, index));
  std::vector<Sequence> axioms, rules;
  for (const auto& a : spec.axioms) axioms.push_back(parse_sequence(a));
  for (const auto& r : spec.rules) rules.push_back(parse_sequence(r));
  std::uniform_int_distribution<std::size_t> pick_axiom(0, axioms.size() - 1);
  std::uniform_int_distribution<int> pick_iters(spec.max_iterations > 0 ? 1 : 0,
                                                spec.max_iterations);

  for (std::size_t attempt = 1; attempt <= spec.max_attempts; ++attempt) {
    Sequence seq = axioms[pick_axiom(rng)];
    const int iterations = pick_iters(rng);
    for (int it = 0; it < iterations; ++it) seq = rewrite(seq, rules, rng);
    Interpretation interp = interpret(seq, rng, spec);
    if (interp.rejected) continue;
    SpatialGraph graph = std::move(interp.graph);
    if (spec.resample_px > 0.0) {
      graph = resample_nodes(graph, spec.resample_px, spec.canvas_px);
      if (graph.node_count() >= spec.max_nodes) continue;
    }
    GeneratedSample out;
    out.graph = std::move(graph);
    out.sequence = to_string(seq);
    out.iterations = iterations;
    out.attempts = attempt;
    out.length_factors = std::move(interp.length_factors);
    out.turn_angles_deg = std::move(interp.turn_angles_deg);
    return out;
  }
  throw InputError("sample " + std::to_string(index) + ": no sample under the node cap after " +
                   std::to_string(spec.max_attempts) + " attempts");
}

nlohmann::ordered_json generate_dataset(const LSystemSpec& spec, std::size_t count,
                                        std::uint64_t seed, const std::filesystem::path& out_dir,
                                        const DatasetOptions& options) {
  spec.validate();
  std::vector<nlohmann::ordered_json> records(count);
  parallel_for(count, options.threads, [&](std::size_t i) {
    const GeneratedSample s = generate_sample(spec, seed, i);
    const std::string stem = sample_stem(i);
    try {
      save_graph(s.graph, out_dir / "graphs" / (stem + ".json"));
      if (options.render) {
        const auto px = static_cast<std::size_t>(spec.canvas_px);
        write_png(rasterize(s.graph, px, px, options.stroke_px),
                  out_dir / "images" / (stem + ".png"));
      }
    } catch (const IoError& e) {
      throw IoError("sample " + std::to_string(i) + ": " + e.what());
    }
    nlohmann::ordered_json r;
    r["index"] = i;
    r["graph"] = "graphs/" + stem + ".json";
    if (options.render) r["image"] = "images/" + stem + ".png";
    r["nodes"] = s.graph.node_count();
    r["edges"] = s.graph.edge_count();
    r["iterations"] = s.iterations;
    r["attempts"] = s.attempts;
    records[i] = std::move(r);
  });

  nlohmann::ordered_json manifest;
  manifest["seed"] = seed;
  manifest["count"] = count;
  manifest["spec_hash"] = lsystem_spec_hash(spec);
  manifest["spec"] = lsystem_spec_to_json(spec);
  manifest["samples"] = records;
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

std::vector<SpatialGraph> load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json manifest = read_json_file(dir / "manifest.json");
  if (!manifest.contains("samples") || !manifest["samples"].is_array()) {
    throw ParseError((dir / "manifest.json").string() + ":samples", "missing array");
  }
  std::vector<SpatialGraph> graphs;
  for (std::size_t k = 0; k < manifest["samples"].size(); ++k) {
    const auto& s = manifest["samples"][k];
    if (!s.contains("graph") || !s["graph"].is_string()) {
      throw ParseError("samples[" + std::to_string(k) + "].graph", "missing path");
    }
    graphs.push_back(load_graph(dir / s["graph"].get<std::string>()));
  }
  return graphs;
}

}  // namespace tcg
