#include "tcg/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcg/errors.hpp"
#include "tcg/gradcheck.hpp"
#include "tcg/graph.hpp"
#include "tcg/io.hpp"
#include "tcg/lsystem.hpp"
#include "tcg/metrics.hpp"
#include "tcg/mst.hpp"
#include "tcg/parallel.hpp"
#include "tcg/raster.hpp"
#include "tcg/rng.hpp"
#include "tcg/scorer.hpp"
#include "tcg/training.hpp"

namespace tcg {

namespace {

namespace fs = std::filesystem;

// JSON config files: top-level keys set global options, an object under a
// subcommand name sets that subcommand's options. Underscores in keys are
// read as dashes. Values already given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("--config", e.what());
    }
    if (!j.is_object()) throw ParseError("--config", "expected a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      std::string name = key;
      std::replace(name.begin(), name.end(), '_', '-');
      if (value.is_null()) continue;
      if (value.is_object()) {
        auto sub = parents;
        sub.push_back(name);
        flatten(value, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = name;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

nlohmann::ordered_json typed_value(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  std::int64_t i = 0;
  if (auto [p, ec] = std::from_chars(first, last, i); ec == std::errc() && p == last) return i;
  std::uint64_t u = 0;
  if (auto [p, ec] = std::from_chars(first, last, u); ec == std::errc() && p == last) return u;
  if (!v.empty()) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() + v.size() && std::isfinite(d)) return d;
  }
  return v;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;
  bool quiet = false;
};

// Resolved options of the run, minus the ones that cannot change outputs.
nlohmann::ordered_json snapshot(const Globals& g, const CLI::App& sub) {
  nlohmann::ordered_json j;
  j["seed"] = g.seed;
  j["out"] = g.out;
  nlohmann::ordered_json s = nlohmann::ordered_json::object();
  for (const CLI::Option* o : sub.get_options()) {
    const std::string name = o->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (o->get_expected_min() == 0) {
      s[name] = o->count() > 0;
      continue;
    }
    const std::string v = o->count() > 0 ? o->results().back() : o->get_default_str();
    if (v.empty()) continue;
    s[name] = typed_value(v);
  }
  j[sub.get_name()] = std::move(s);
  return j;
}

void write_snapshot(const Globals& g, const CLI::App& sub) {
  write_text_file(fs::path(g.out) / (sub.get_name() + ".config.json"), snapshot(g, sub).dump(2) + "\n");
}

std::vector<std::pair<std::string, SpatialGraph>> load_graph_dir(const fs::path& dir, unsigned threads) {
  const auto files = list_graph_files(dir);
  std::vector<std::pair<std::string, SpatialGraph>> out;
  for (const auto& [name, _] : files) out.emplace_back(name, SpatialGraph{});
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i].second = load_graph(files.at(out[i].first)); });
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct GenArgs {
  std::string spec;
  std::size_t count = 100;
  bool render = false;
  double stroke = 2.0;
};

struct TrainArgs {
  std::string data;
  std::string mode = "ours";
  double lambda = 10.0;
  double lr = 0.05;
  double momentum = 0.9;
  std::size_t epochs = 100;
  double positive_weight = 0.0;
  double noise = 0.005;
  std::size_t hidden = 64;
  std::size_t k_points = 100;
  double topo_radius = 0.01;
  double val_fraction = 0.1;
};

struct InferArgs {
  std::string model;
  std::string graphs;
  std::string mode = "ours";
  double noise = 0.005;
};

struct ProjectArgs {
  std::string probs;
};

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::size_t k_points = 100;
  double topo_radius = 0.01;
};

struct GradcheckArgs {
  std::size_t configs = 1000;
  std::size_t nodes = 6;
  std::size_t hidden = 16;
  double lambda = 10.0;
  std::size_t cases = 200;
};

struct RenderArgs {
  std::string graphs;
  std::size_t size = 512;
  double stroke = 2.0;
  double node_radius = 0.0;
  bool svg = false;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string(flag) + " is required");
}

int cmd_gen(const Globals& g, const GenArgs& a, std::ostream& out) {
  const LSystemSpec spec = a.spec.empty() ? LSystemSpec{} : load_lsystem_spec(a.spec);
  spec.validate();
  DatasetOptions opt;
  opt.render = a.render;
  opt.stroke_px = a.stroke;
  opt.threads = g.threads;
  const auto manifest = generate_dataset(spec, a.count, g.seed, g.out, opt);
  if (!g.quiet) {
    out << "generated " << a.count << " samples in " << g.out << " (spec " << manifest["spec_hash"].get<std::string>()
        << ")\n";
  }
  return kExitOk;
}

TrainConfig train_config(const Globals& g, const TrainArgs& a) {
  TrainConfig cfg;
  cfg.mode = parse_mode(a.mode);
  cfg.lambda = a.lambda;
  cfg.learning_rate = a.lr;
  cfg.momentum = a.momentum;
  cfg.epochs = a.epochs;
  cfg.positive_weight = a.positive_weight;
  cfg.node_noise = a.noise;
  cfg.seed = g.seed;
  cfg.hidden = a.hidden;
  cfg.metrics.k_points = a.k_points;
  cfg.metrics.topo_radius = a.topo_radius;
  cfg.metrics.threads = g.threads;
  cfg.validate();
  return cfg;
}

int cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
  require(a.data, "--data");
  const TrainConfig cfg = train_config(g, a);
  const auto graphs = load_dataset(a.data);
  const auto [train_idx, val_idx] = split_indices(graphs.size(), a.val_fraction, g.seed);
  std::vector<SpatialGraph> train_set, val_set;
  for (auto i : train_idx) train_set.push_back(graphs[i]);
  for (auto i : val_idx) val_set.push_back(graphs[i]);

  const TrainResult r = train(train_set, val_set, cfg);
  const fs::path root(g.out);
  write_text_file(root / "models" / "model.json", dump_json(model_to_json(r.model)));
  std::string log;
  for (const EpochLog& e : r.log) log += dump_json(epoch_log_to_json(e));
  write_text_file(root / "logs" / "train.jsonl", log);
  if (!g.quiet) {
    out << "mode " << mode_name(cfg.mode) << ": " << train_set.size() << " train / " << val_set.size()
        << " validation samples, " << cfg.epochs << " epochs, best epoch " << r.best_epoch;
    if (!r.log.empty() && r.log.back().has_validation) {
      const EpochLog& b = r.log[r.best_epoch > 0 ? r.best_epoch - 1 : 0];
      out << " (val smd " << fmt("%.6g", b.val_smd) << ", topo f1 " << fmt("%.4f", b.val_f1) << ")";
    }
    out << "\n";
  }
  return kExitOk;
}

int cmd_infer(const Globals& g, const InferArgs& a, std::ostream& out) {
  require(a.model, "--model");
  require(a.graphs, "--graphs");
  if (!(a.noise >= 0.0) || !std::isfinite(a.noise)) throw InputError("--noise must be >= 0");
  const ConstraintMode mode = parse_mode(a.mode);
  const bool projected = infers_with_projection(mode);
  ScorerModel model;
  {
    const auto j = read_json_file(a.model);
    try {
      model = model_from_json(j);
    } catch (const ParseError& e) {
      throw ParseError(a.model, e.what());
    }
  }
  const auto inputs = load_graph_dir(a.graphs, g.threads);
  std::vector<char> trees(inputs.size(), 0);
  parallel_for(inputs.size(), g.threads, [&](std::size_t i) {
    const auto nodes = perturb_nodes(inputs[i].second.nodes(), a.noise, derive_seed(g.seed, streams::kNodeNoise, i));
    const SpatialGraph pred = infer(model, nodes, projected);
    trees[i] = is_tree(pred) ? 1 : 0;
    save_graph(pred, fs::path(g.out) / "graphs" / inputs[i].first);
  });
  if (!g.quiet) {
    std::size_t n_trees = 0;
    for (char t : trees) n_trees += t;
    out << "inferred " << inputs.size() << " graphs (" << (projected ? "MST projection" : "thresholded")
        << "), " << n_trees << " trees\n";
  }
  return kExitOk;
}

int cmd_project(const Globals& g, const ProjectArgs& a, std::ostream& out) {
  require(a.probs, "--probs");
  EdgeProbabilities probs;
  {
    const auto j = read_json_file(a.probs);
    try {
      probs = probabilities_from_json(j);
    } catch (const ParseError& e) {
      throw ParseError(a.probs, e.what());
    }
  }
  const MstResult mst = project_mst(probs);
  const Projection proj = project(probs);
  nlohmann::ordered_json j;
  j["n"] = probs.node_count();
  j["edges"] = edges_to_json(proj.edges);
  j["added"] = edges_to_json(proj.delta.added);
  j["removed"] = edges_to_json(proj.delta.removed);
  j["total_cost"] = mst.total_cost;
  j["degenerate"] = proj.degenerate;
  const std::string text = dump_json(j);
  write_text_file(fs::path(g.out) / "graphs" / fs::path(a.probs).filename(), text);
  if (!g.quiet) out << text;
  return kExitOk;
}

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out) {
  require(a.pred, "--pred");
  require(a.gt, "--gt");
  MetricsConfig cfg;
  cfg.k_points = a.k_points;
  cfg.topo_radius = a.topo_radius;
  cfg.threads = g.threads;
  if (cfg.k_points == 0) throw InputError("--k-points must be positive");
  if (!(cfg.topo_radius > 0.0)) throw InputError("--topo-radius must be positive");
  const MetricsReport r = evaluate_dataset(a.pred, a.gt, cfg);
  const fs::path root(g.out);
  write_text_file(root / "reports" / "eval.json", report_to_json(r).dump(2) + "\n");
  write_text_file(root / "reports" / "samples.jsonl", samples_to_jsonl(r));
  if (!g.quiet) out << dump_json(report_to_json(r)["aggregate"]);
  return kExitOk;
}

int cmd_gradcheck(const Globals& g, const GradcheckArgs& a, std::ostream& out) {
  GradcheckConfig cfg;
  cfg.configs = a.configs;
  cfg.max_nodes = a.nodes;
  cfg.hidden = a.hidden;
  cfg.lambda = a.lambda;
  cfg.case_instances = a.cases;
  cfg.seed = g.seed;
  const GradcheckReport r = run_gradcheck(cfg);
  const std::string text = format_gradcheck(r) + format_lambda_table({2.0, 5.0, 10.0, 100.0});
  write_text_file(fs::path(g.out) / "reports" / "gradcheck.txt", text);
  out << text;
  return r.pass() ? kExitOk : kExitNumerical;
}

int cmd_render(const Globals& g, const RenderArgs& a, std::ostream& out) {
  require(a.graphs, "--graphs");
  if (a.size == 0) throw InputError("--size must be positive");
  std::vector<std::pair<std::string, SpatialGraph>> inputs;
  if (fs::is_regular_file(a.graphs)) {
    inputs.emplace_back(fs::path(a.graphs).filename().string(), load_graph(a.graphs));
  } else {
    inputs = load_graph_dir(a.graphs, g.threads);
  }
  parallel_for(inputs.size(), g.threads, [&](std::size_t i) {
    const std::string stem = fs::path(inputs[i].first).stem().string();
    const fs::path dir = fs::path(g.out) / "images";
    if (a.svg) {
      write_text_file(dir / (stem + ".svg"), to_svg(inputs[i].second, a.size, a.size, a.stroke));
    } else {
      write_png(rasterize(inputs[i].second, a.size, a.size, a.stroke, a.node_radius), dir / (stem + ".png"));
    }
  });
  if (!g.quiet) out << "rendered " << inputs.size() << " images\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tree-constrained graph generation toolkit", "tcg"};
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file (command-line flags take precedence)");

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads for per-sample stages")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an L-system tree dataset");
  gen_cmd->add_option("--spec", gen.spec, "L-system spec JSON (defaults built in)");
  gen_cmd->add_option("--count", gen.count, "Number of samples");
  gen_cmd->add_flag("--render", gen.render, "Also write one PNG per graph");
  gen_cmd->add_option("--stroke", gen.stroke, "Stroke width in pixels");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the pair scorer on a dataset");
  train_cmd->add_option("--data", tr.data, "Dataset directory with manifest.json");
  train_cmd->add_option("--mode", tr.mode, "unconstrained | test-time | train-only | ours");
  train_cmd->add_option("--lambda", tr.lambda, "Suppression constant");
  train_cmd->add_option("--lr", tr.lr, "Learning rate");
  train_cmd->add_option("--momentum", tr.momentum, "SGD momentum");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs");
  train_cmd->add_option("--positive-weight", tr.positive_weight, "Positive pair weight (<= 0: automatic)");
  train_cmd->add_option("--noise", tr.noise, "Node coordinate noise");
  train_cmd->add_option("--hidden", tr.hidden, "Hidden width");
  train_cmd->add_option("--k-points", tr.k_points, "Points per graph for SMD");
  train_cmd->add_option("--topo-radius", tr.topo_radius, "TOPO matching radius");
  train_cmd->add_option("--val-fraction", tr.val_fraction, "Validation fraction");

  InferArgs inf;
  auto* infer_cmd = app.add_subcommand("infer", "Predict graphs from node sets");
  infer_cmd->add_option("--model", inf.model, "Model JSON");
  infer_cmd->add_option("--graphs", inf.graphs, "Directory of graphs whose nodes are used");
  infer_cmd->add_option("--mode", inf.mode, "Constraint mode (decides MST at inference)");
  infer_cmd->add_option("--noise", inf.noise, "Node coordinate noise");

  ProjectArgs pr;
  auto* project_cmd = app.add_subcommand("project", "Project edge probabilities onto a spanning tree");
  project_cmd->add_option("--probs", pr.probs, "Edge probability JSON");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score predicted graphs against ground truth");
  eval_cmd->add_option("--pred", ev.pred, "Predicted graph directory");
  eval_cmd->add_option("--gt", ev.gt, "Ground-truth graph directory");
  eval_cmd->add_option("--k-points", ev.k_points, "Points per graph for SMD");
  eval_cmd->add_option("--topo-radius", ev.topo_radius, "TOPO matching radius");

  GradcheckArgs gc;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Check SFS and edge-loss gradients");
  grad_cmd->add_option("--configs", gc.configs, "Random configurations");
  grad_cmd->add_option("--nodes", gc.nodes, "Largest instance size");
  grad_cmd->add_option("--hidden", gc.hidden, "Scorer hidden width for the parameter check");
  grad_cmd->add_option("--lambda", gc.lambda, "Suppression constant");
  grad_cmd->add_option("--cases", gc.cases, "Instances per case row");

  RenderArgs rd;
  auto* render_cmd = app.add_subcommand("render", "Rasterize graphs");
  render_cmd->add_option("--graphs", rd.graphs, "Graph file or directory");
  render_cmd->add_option("--size", rd.size, "Image size in pixels");
  render_cmd->add_option("--stroke", rd.stroke, "Stroke width in pixels");
  render_cmd->add_option("--node-radius", rd.node_radius, "Node disc radius in pixels (0: none)");
  render_cmd->add_flag("--svg", rd.svg, "Write SVG instead of PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    write_snapshot(g, *sub);
    if (sub == gen_cmd) return cmd_gen(g, gen, out);
    if (sub == train_cmd) return cmd_train(g, tr, out);
    if (sub == infer_cmd) return cmd_infer(g, inf, out);
    if (sub == project_cmd) return cmd_project(g, pr, out);
    if (sub == eval_cmd) return cmd_eval(g, ev, out);
    if (sub == grad_cmd) return cmd_gradcheck(g, gc, out);
    if (sub == render_cmd) return cmd_render(g, rd, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace tcg
