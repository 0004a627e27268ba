#include "recourse/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "recourse/autoencoder.hpp"
#include "recourse/dataset.hpp"
#include "recourse/errors.hpp"
#include "recourse/eval.hpp"
#include "recourse/generator.hpp"
#include "recourse/json_util.hpp"
#include "recourse/model_io.hpp"
#include "recourse/models.hpp"
#include "recourse/plot.hpp"
#include "recourse/search.hpp"

namespace recourse {

namespace {

constexpr std::size_t kDefaultSyntheticRows = 1000;
constexpr std::uint64_t kDefaultDataSeed = 1;

struct DataOptions {
  std::string source = "synthetic:linearly_separable";
  std::string target_column;
  bool no_standardize = false;
  bool keep_incomplete = false;
  std::string mutability;
};

struct RunOptions {
  DataOptions data;
  std::string target;
  std::string seed;
  std::string out;
  std::string model = "model.json";
  std::vector<std::string> models;
  std::string generator = "generic";
  std::vector<std::string> generators;
  std::string autoencoder;
  int latent_dim = 0;
  std::vector<int> ae_hidden;
  int num_counterfactuals = 0;
  double gamma = 0.5;
  int max_iter = 1000;
  double min_step = 1e-3;
  std::string check = "threshold_reached";
  Eigen::Index index = 0;
  int count = 1;
  std::string explanations;
  std::vector<std::string> measures;
  int k = kDefaultNeighbours;
  int samples = 10;
  int threads = 1;
  int grid = kDefaultGrid;
  // train
  std::string kind = "linear";
  std::vector<int> hidden = {32};
  double dropout = 0.0;
  int epochs = 100;
  double lr = 0.01;
  int batch = 32;
  int ensemble_size = 5;
  int max_depth = 5;
  int n_trees = 10;
  std::string autoencoder_out;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

std::uint64_t resolve_seed(const RunOptions& o) {
  std::string text = o.seed;
  if (text.empty()) {
    if (const char* env = std::getenv("RECOURSE_SEED")) text = env;
  }
  if (text.empty()) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed must be a non-negative integer, got '" + text + "'");
  }
}

std::vector<Mutability> parse_mutability_flag(const std::string& text, const std::vector<std::string>& names) {
  const auto items = split(text, ',');
  const bool named = std::any_of(items.begin(), items.end(), [](const auto& s) { return s.find('=') != std::string::npos; });
  if (!named) {
    if (items.size() != names.size()) {
      throw ConfigError("--mutability lists " + std::to_string(items.size()) + " tags but the data has " +
                        std::to_string(names.size()) + " features");
    }
    std::vector<Mutability> tags;
    for (const auto& s : items) tags.push_back(parse_mutability(s));
    return tags;
  }
  std::vector<Mutability> tags(names.size(), Mutability::Both);
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--mutability mixes positional and name=tag entries");
    const auto name = item.substr(0, eq);
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("--mutability names unknown feature '" + name + "'");
    tags[static_cast<std::size_t>(it - names.begin())] = parse_mutability(item.substr(eq + 1));
  }
  return tags;
}

Dataset load_data(const DataOptions& o, const std::string& fallback_target, std::ostream& err) {
  Dataset d;
  if (o.source.rfind("synthetic:", 0) == 0) {
    const auto parts = split(o.source.substr(10), ':');
    if (parts.empty() || parts.size() > 3) throw ConfigError("expected --data synthetic:KIND[:N[:SEED]]");
    std::size_t n = kDefaultSyntheticRows;
    std::uint64_t seed = kDefaultDataSeed;
    try {
      if (parts.size() > 1) n = std::stoul(parts[1]);
      if (parts.size() > 2) seed = std::stoull(parts[2]);
    } catch (const std::exception&) {
      throw ConfigError("malformed synthetic data spec '" + o.source + "'");
    }
    d = load_synthetic(parts[0], n, seed);
  } else {
    const auto column = o.target_column.empty() ? fallback_target : o.target_column;
    if (column.empty()) throw ConfigError("CSV data needs --target-column");
    CsvReport report;
    d = load_csv(o.source, column, !o.keep_incomplete, &report);
    if (report.rows_dropped > 0) {
      err << "dropped " << report.rows_dropped << " of " << report.rows_read << " rows with missing values\n";
    }
  }
  if (!o.no_standardize) d = standardize(d);
  if (!o.mutability.empty()) d = set_mutability(d, parse_mutability_flag(o.mutability, d.feature_names()));
  return d;
}

int resolve_target(const Dataset& d, const std::string& text) {
  if (text.empty()) return d.n_classes();
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw ConfigError("--target must be a label value, got '" + text + "'");
  }
  return d.internal_label(value);
}

ConvergenceConfig convergence(const RunOptions& o) {
  ConvergenceConfig c;
  c.decision_threshold = o.gamma;
  c.max_iter = o.max_iter;
  c.min_step = o.min_step;
  c.check = parse_convergence_check(o.check);
  return c;
}

bool wants_latent(const std::string& generator) {
  if (generator == "revise") return true;
  if (generator.size() > 5 && generator.ends_with(".json")) {
    const auto j = nlohmann::json::parse(read_file(generator), nullptr, false);
    if (j.is_discarded()) throw ParseError("generator file '" + generator + "' is not valid JSON");
    if (j.value("preset", std::string()) == "revise") return true;
    return j.contains("objective") && j["objective"].value("search_space", std::string()) == "latent";
  }
  return false;
}

AutoencoderPtr resolve_autoencoder(const RunOptions& o, const Dataset& d, bool needed, std::uint64_t seed) {
  if (!o.autoencoder.empty()) return load_autoencoder(o.autoencoder);
  if (!needed) return nullptr;
  const Eigen::Index K = o.latent_dim > 0 ? o.latent_dim : std::max<Eigen::Index>(1, d.dims() / 2);
  AutoencoderConfig cfg;
  cfg.hidden = o.ae_hidden;
  cfg.train.seed = seed;
  return std::make_shared<const Autoencoder>(train_autoencoder(d, K, cfg));
}

Generator resolve_generator(const std::string& name, const RunOptions& o, const Dataset& d, std::uint64_t seed) {
  const auto ae = resolve_autoencoder(o, d, wants_latent(name), seed);
  if (name.ends_with(".json")) {
    auto g = generator_from_json(nlohmann::json::parse(read_file(name), nullptr, false), ae);
    if (o.num_counterfactuals > 0) g = with_num_counterfactuals(std::move(g), o.num_counterfactuals);
    return g;
  }
  PresetOptions p;
  p.num_counterfactuals = o.num_counterfactuals;
  p.autoencoder = ae;
  return preset(name, p);
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

TrainConfig train_config(const RunOptions& o, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.learning_rate = o.lr;
  cfg.batch_size = o.batch;
  cfg.seed = seed;
  return cfg;
}

ModelSpec model_spec(const RunOptions& o, const std::string& kind) {
  ModelSpec s;
  s.kind = kind;
  s.hidden = o.hidden;
  s.dropout = o.dropout;
  s.ensemble_size = o.ensemble_size;
  s.max_depth = o.max_depth;
  s.n_trees = o.n_trees;
  return s;
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

nlohmann::json explanation_json(const ExplanationState& es, const Dataset& d, const Model& m, Eigen::Index row) {
  auto j = to_json(es);
  j["factual_index"] = row + 1;
  j["target_label"] = d.original_label(es.target);
  const auto v = validity(es, m);
  j["valid"] = v.valid;
  j["validity_fraction"] = v.fraction;
  if (d.standardizer()) {
    j["factual_original"] = vector_to_json(d.standardizer()->invert(es.factual));
    j["counterfactuals_original"] = matrix_to_json(d.standardizer()->invert_rows(es.counterfactuals));
  }
  return j;
}

std::vector<ExplanationState> read_explanations(const std::string& path) {
  if (path.empty()) throw ConfigError("--explanations is required");
  const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ParseError("'" + path + "' is not valid JSON");
  std::vector<ExplanationState> out;
  const auto& list = j.is_object() && j.contains("explanations") ? j["explanations"] : j;
  if (list.is_array()) {
    for (const auto& e : list) out.push_back(explanation_from_json(e));
  } else {
    out.push_back(explanation_from_json(list));
  }
  if (out.empty()) throw ConfigError("'" + path + "' holds no explanations");
  return out;
}

int cmd_train(const RunOptions& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw ConfigError("train needs --out for the model file");
  const auto seed = resolve_seed(o);
  const auto d = load_data(o.data, o.target, err);
  TrainReport report;
  const auto model = train(model_spec(o, o.kind), d, train_config(o, seed), &report);
  save_model(*model, o.out);
  out << "model=" << model->kind() << " accuracy=" << format_double(report.accuracy);
  if (!report.epoch_loss.empty()) out << " loss=" << format_double(report.epoch_loss.back());
  out << '\n';
  if (!o.autoencoder_out.empty()) {
    const auto ae = resolve_autoencoder(o, d, true, seed);
    save_autoencoder(*ae, o.autoencoder_out);
    out << "autoencoder latent_dim=" << ae->latent_dim()
        << " reconstruction_mse=" << format_double(ae->reconstruction_mse(d.X())) << '\n';
  }
  return kExitOk;
}

int cmd_generate(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const auto seed = resolve_seed(o);
  const auto d = load_data(o.data, "", err);
  const auto model = load_model(o.model);
  const int target = resolve_target(d, o.target);
  const auto gen = resolve_generator(o.generator, o, d, seed);
  print_warnings(gen.warnings, err);

  std::vector<Eigen::Index> rows;
  if (o.index > 0) {
    if (o.index > d.rows()) throw IndexError("--index " + std::to_string(o.index) + " exceeds the " +
                                             std::to_string(d.rows()) + " data rows");
    rows.push_back(o.index - 1);
  } else {
    rows = draw_factuals(d, *model, target, o.count, seed);
    if (rows.empty()) {
      throw ConfigError("no candidate factuals: every row is already predicted as label " + o.target);
    }
  }
  SearchOptions opts;
  opts.convergence = convergence(o);
  opts.num_counterfactuals = o.num_counterfactuals;
  auto list = nlohmann::json::array();
  bool all_valid = true;
  std::vector<ExplanationState> states;
  for (auto row : rows) {
    opts.seed = seed + static_cast<std::uint64_t>(row);
    const auto es = generate_counterfactual(select_factual(d, row + 1), target, d, *model, gen, opts);
    print_warnings(es.warnings, err);
    const auto v = validity(es, *model);
    all_valid = all_valid && v.valid;
    out << "factual " << row + 1 << ": " << to_string(es.reason) << " after " << es.iterations
        << " iterations, valid=" << (v.valid ? "true" : "false") << '\n';
    list.push_back(explanation_json(es, d, *model, row));
    states.push_back(es);
  }
  nlohmann::json doc = {{"generator", generator_to_json(gen)},
                        {"feature_names", d.feature_names()},
                        {"target_label", d.original_label(target)},
                        {"explanations", std::move(list)}};
  write_file_atomic(o.out.empty() ? "explanation.json" : o.out, doc.dump(2) + "\n");
  return all_valid ? kExitOk : kExitSearchFailed;
}

int cmd_evaluate(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const auto d = load_data(o.data, "", err);
  const auto model = load_model(o.model);
  const auto explanations = read_explanations(o.explanations);
  std::vector<Measure> measures;
  for (const auto& m : o.measures) measures.push_back(parse_measure(m));
  if (measures.empty()) measures = all_measures();
  const auto report = evaluate(explanations, *model, d, measures, o.k);
  for (const auto& [ms, a] : report.aggregates) {
    out << to_string(ms) << " mean=" << format_double(a.mean) << " std=" << format_double(a.std) << '\n';
  }
  if (!o.out.empty()) {
    write_file_atomic(o.out, o.out.ends_with(".json") ? to_json(report).dump(2) + "\n" : report_csv(report));
  }
  return kExitOk;
}

int cmd_benchmark(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const auto seed = resolve_seed(o);
  const auto d = load_data(o.data, "", err);
  BenchmarkSpec spec;
  spec.dataset_id = o.data.source.rfind("synthetic:", 0) == 0 ? split(o.data.source, ':')[1] : stem(o.data.source);
  spec.seed = seed;
  spec.n_samples = o.samples;
  spec.k = o.k;
  spec.threads = o.threads;
  spec.target = resolve_target(d, o.target);
  spec.search.convergence = convergence(o);
  spec.search.num_counterfactuals = o.num_counterfactuals;
  const auto model_names = o.models.empty() ? std::vector<std::string>{"linear"} : o.models;
  for (const auto& m : model_names) {
    if (std::filesystem::exists(m)) {
      spec.models.push_back({stem(m), load_model(m)});
    } else {
      spec.models.push_back({m, train(model_spec(o, m), d, train_config(o, seed))});
    }
  }
  const auto gen_names = o.generators.empty() ? std::vector<std::string>{"generic"} : o.generators;
  for (const auto& g : gen_names) spec.generators.push_back(resolve_generator(g, o, d, seed));
  const auto rows = benchmark(d, spec);
  const auto summary = tradeoff_summary(rows);
  const auto prefix = o.out.empty() ? std::string("benchmark") : o.out;
  write_file_atomic(prefix + ".csv", benchmark_csv(rows));
  write_file_atomic(prefix + ".json", benchmark_json(rows).dump(2) + "\n");
  write_file_atomic(prefix + "_tradeoff.csv", tradeoff_csv(summary));
  out << "model generator runs validity cost implausibility\n";
  for (const auto& e : summary) {
    out << e.model << ' ' << e.generator << ' ' << e.runs << ' ' << format_double(e.validity) << ' '
        << format_double(e.cost) << ' ' << format_double(e.implausibility) << '\n';
  }
  for (const auto& r : rows) {
    if (r.skipped) err << "skipped " << r.model << '/' << r.generator << ": " << r.note << '\n';
  }
  return kExitOk;
}

int cmd_plot(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const auto d = load_data(o.data, "", err);
  if (d.dims() != 2) throw DimensionError("plot supports 2-D data only; this data set has " + std::to_string(d.dims()) + " features");
  const auto model = load_model(o.model);
  const int target = resolve_target(d, o.target);
  std::vector<ExplanationState> explanations;
  if (!o.explanations.empty()) explanations = read_explanations(o.explanations);
  const auto grid = probability_grid(*model, d, target, o.grid);
  const auto prefix = o.out.empty() ? std::string("plot") : o.out;
  write_file_atomic(prefix + "_grid.csv", grid_csv(grid));
  write_file_atomic(prefix + ".svg", render_svg(grid, d, explanations));
  out << "wrote " << prefix << "_grid.csv and " << prefix << ".svg\n";
  return kExitOk;
}

void add_data(CLI::App* app, RunOptions& o) {
  app->add_option("--data", o.data.source, "synthetic:KIND[:N[:SEED]] or a CSV path");
  app->add_option("--target-column", o.data.target_column, "label column of a CSV data set");
  app->add_flag("--no-standardize", o.data.no_standardize, "keep features in original units");
  app->add_flag("--keep-incomplete", o.data.keep_incomplete, "fail on rows with missing values instead of dropping them");
  app->add_option("--mutability", o.data.mutability, "tags per feature (none,both) or name=tag pairs");
  app->add_option("--seed", o.seed, "random seed (default: $RECOURSE_SEED or 0)");
}

void add_search(CLI::App* app, RunOptions& o, bool many) {
  if (many) {
    app->add_option("--model", o.models, "model files or kinds to train (repeatable)");
    app->add_option("--generator", o.generators, "preset names or JSON files (repeatable)");
  } else {
    app->add_option("--model", o.model, "model JSON file");
    app->add_option("--generator", o.generator, "preset name or generator JSON file");
  }
  app->add_option("--target", o.target, "target label (default: the last class)");
  app->add_option("--autoencoder", o.autoencoder, "autoencoder JSON for latent search");
  app->add_option("--latent-dim", o.latent_dim, "latent width when an autoencoder is trained on the fly");
  app->add_option("--ae-hidden", o.ae_hidden, "hidden widths of that autoencoder (default: none, i.e. linear)")
      ->delimiter(',');
  app->add_option("--num-counterfactuals", o.num_counterfactuals, "counterfactuals per factual");
  app->add_option("--gamma", o.gamma, "decision threshold");
  app->add_option("--max-iter", o.max_iter, "iteration budget");
  app->add_option("--min-step", o.min_step, "step tolerance for --check step_below_tau");
  app->add_option("--check", o.check, "threshold_reached | max_iter | step_below_tau");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counterfactual explanations and algorithmic recourse for tabular classifiers", "recourse"};
  app.require_subcommand(1);
  RunOptions o;

  auto* train_cmd = app.add_subcommand("train", "train a classifier and save it as JSON");
  add_data(train_cmd, o);
  train_cmd->add_option("--target", o.target, "label column of a CSV data set");
  train_cmd->add_option("--model", o.kind, "linear | mlp | ensemble | tree | forest");
  train_cmd->add_option("--hidden", o.hidden, "hidden layer widths")->delimiter(',');
  train_cmd->add_option("--dropout", o.dropout, "dropout on hidden layers");
  train_cmd->add_option("--epochs", o.epochs);
  train_cmd->add_option("--lr", o.lr, "learning rate");
  train_cmd->add_option("--batch", o.batch);
  train_cmd->add_option("--ensemble-size", o.ensemble_size);
  train_cmd->add_option("--max-depth", o.max_depth);
  train_cmd->add_option("--n-trees", o.n_trees);
  train_cmd->add_option("--autoencoder-out", o.autoencoder_out, "also train an autoencoder and save it here");
  train_cmd->add_option("--latent-dim", o.latent_dim, "autoencoder latent width");
  train_cmd->add_option("--ae-hidden", o.ae_hidden, "autoencoder hidden widths (default: none)")->delimiter(',');
  train_cmd->add_option("-o,--out", o.out, "model output file");

  auto* gen_cmd = app.add_subcommand("generate", "search counterfactuals for factuals not in the target class");
  add_data(gen_cmd, o);
  add_search(gen_cmd, o, false);
  gen_cmd->add_option("--index", o.index, "1-based data row to explain");
  gen_cmd->add_option("--count", o.count, "number of random factuals when --index is not given");
  gen_cmd->add_option("-o,--out", o.out, "explanation JSON output");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate explanations written by generate");
  add_data(eval_cmd, o);
  eval_cmd->add_option("--model", o.model, "model JSON file");
  eval_cmd->add_option("--explanations", o.explanations, "explanation JSON")->required();
  eval_cmd->add_option("--measure", o.measures, "measure id (repeatable)");
  eval_cmd->add_option("--k", o.k, "neighbours for plausibility");
  eval_cmd->add_option("-o,--out", o.out, "report file (.csv or .json)");

  auto* bench_cmd = app.add_subcommand("benchmark", "run several generators on the same factuals");
  add_data(bench_cmd, o);
  add_search(bench_cmd, o, true);
  bench_cmd->add_option("--samples", o.samples, "factuals per model");
  bench_cmd->add_option("--threads", o.threads);
  bench_cmd->add_option("--k", o.k, "neighbours for plausibility");
  bench_cmd->add_option("--epochs", o.epochs, "epochs for models trained on the fly");
  bench_cmd->add_option("-o,--out", o.out, "output prefix for .csv, .json and _tradeoff.csv");

  auto* plot_cmd = app.add_subcommand("plot", "probability grid CSV and SVG for 2-D data");
  add_data(plot_cmd, o);
  plot_cmd->add_option("--model", o.model, "model JSON file");
  plot_cmd->add_option("--target", o.target, "target label (default: the last class)");
  plot_cmd->add_option("--explanations", o.explanations, "explanation JSON whose paths are drawn");
  plot_cmd->add_option("--grid", o.grid, "lattice resolution");
  plot_cmd->add_option("-o,--out", o.out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(o, out, err);
    if (gen_cmd->parsed()) return cmd_generate(o, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(o, out, err);
    if (bench_cmd->parsed()) return cmd_benchmark(o, out, err);
    if (plot_cmd->parsed()) return cmd_plot(o, out, err);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSearchFailed;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace recourse
