#include "hyda/cli.hpp"

#include "hyda/config_json.hpp"
#include "hyda/experiments.hpp"
#include "hyda/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace hyda {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  try {
    json j;
    is >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write: " + path.string());
  os << j.dump(2) << "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    vals.push_back(std::stod(item));
  }
  return vals;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(CLI::App& app, std::ostream& out) {
  auto* cmd = app.get_subcommand("generate");
  ToySpec spec;
  if (cmd->count("--exp1")) spec = ToySpec::exp1(1);
  if (cmd->count("--exp2")) spec = ToySpec::exp2(1);
  auto get = [&](const char* name, auto& field) {
    if (cmd->count(name)) field = cmd->get_option(name)->as<std::decay_t<decltype(field)>>();
  };
  get("--n-train", spec.n_train);
  get("--n-val", spec.n_val);
  get("--n-test", spec.n_test);
  get("--input-dim", spec.input_dim);
  get("--output-dim", spec.output_dim);
  get("--b-variance", spec.b_variance);
  get("--eps-variance", spec.eps_variance);
  get("--sigma-main", spec.sigma_main);
  get("--sigma-aux", spec.sigma_aux);
  get("--noise-std", spec.noise_std);
  get("--projection-variance", spec.projection_variance);
  get("--seed", spec.seed);
  if (cmd->count("--aux-mode")) {
    const auto m = cmd->get_option("--aux-mode")->as<std::string>();
    if (m == "related") spec.aux_mode = AuxMode::related;
    else if (m == "unrelated") spec.aux_mode = AuxMode::unrelated;
    else throw ConfigError("--aux-mode must be related or unrelated");
  }

  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  fs::create_directories(out_dir);

  const Dataset ds = generate_toy(spec);
  save_dataset(ds, out_dir / "data.bin");
  json meta{{"kind", "toy"}, {"spec", to_json(spec)}, {"rows", ds.rows()},
            {"checksum", ds.checksum()}};
  write_json_file(meta, out_dir / "meta.json");

  if (cmd->count("--csv")) {
    save_csv(ds, out_dir / "data.csv");
    save_schema(raw_schema_for(ds, SplitFractions{}, spec.seed), out_dir / "schema.json");
  }
  out << "generated " << ds.rows() << " rows -> " << (out_dir / "data.bin").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct DataSource {
  Splits splits;
  std::optional<ToySpec> toy;  // set when the source is a generated toy dir
};

DataSource resolve_data(const std::string& data_arg, const std::string& schema_arg,
                        const SplitFractions& fractions, std::uint64_t split_seed) {
  DataSource src;
  const fs::path p = data_arg;
  if (fs::is_directory(p)) {
    const Dataset full = load_dataset(p / "data.bin");
    if (fs::exists(p / "meta.json")) {
      const json meta = read_json_file(p / "meta.json");
      if (meta.contains("spec")) {
        const ToySpec spec = toyspec_from_json(meta["spec"]);
        src.toy = spec;
        src.splits = split_counts(full, spec.n_train, spec.n_val, spec.n_test);
        return src;
      }
    }
    src.splits = split(full, fractions, split_seed);
    return src;
  }
  if (p.extension() == ".bin") {
    src.splits = split(load_dataset(p), fractions, split_seed);
    return src;
  }
  if (p.extension() == ".csv") {
    if (schema_arg.empty()) throw ConfigError("--schema is required with a CSV data source");
    const CsvSchema schema = load_schema(schema_arg);
    std::vector<std::string> warnings;
    const Dataset full = load_csv(p, schema, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    src.splits = split(full, schema.split, schema.split_seed);
    return src;
  }
  throw ConfigError("cannot interpret data source: " + data_arg);
}

// Flags that only apply to one strategy; anything set for a different
// strategy earns a warning and is ignored.
const std::map<std::string, StrategyKind> kStrategyFlags = {
    {"--beta", StrategyKind::hydalearn},
    {"--normalize-fake-grads", StrategyKind::hydalearn},
    {"--metric-set", StrategyKind::hydalearn},
    {"--downscale", StrategyKind::hydalearn},
    {"--delta-floor", StrategyKind::hydalearn},
    {"--literal-delta-sign", StrategyKind::hydalearn},
    {"--literal-anchor", StrategyKind::hydalearn},
    {"--metric-subsample", StrategyKind::hydalearn},
    {"--static-ratio", StrategyKind::static_weights},
    {"--olaux-period", StrategyKind::olaux},
    {"--olaux-lr", StrategyKind::olaux},
    {"--gradnorm-alpha", StrategyKind::gradnorm},
    {"--gradnorm-lr", StrategyKind::gradnorm},
};

int cmd_train(CLI::App& app, std::ostream& out, std::ostream& err) {
  auto* cmd = app.get_subcommand("train");

  TrainConfig cfg;
  Architecture arch;
  std::string data_arg, schema_arg;
  SplitFractions fractions;
  std::uint64_t split_seed = 1;

  // config file first, flags override below
  if (cmd->count("--config")) {
    const json j = read_json_file(cmd->get_option("--config")->as<std::string>());
    if (j.contains("train")) cfg = trainconfig_from_json(j["train"]);
    if (j.contains("architecture")) arch = architecture_from_json(j["architecture"]);
    if (j.contains("data_path")) data_arg = j["data_path"].get<std::string>();
    if (j.contains("schema_path")) schema_arg = j["schema_path"].get<std::string>();
    if (j.contains("split")) {
      fractions.train = j["split"].value("train", fractions.train);
      fractions.val = j["split"].value("val", fractions.val);
      fractions.test = j["split"].value("test", fractions.test);
      split_seed = j["split"].value("seed", split_seed);
    }
  }

  auto get = [&](const char* name, auto& field) {
    if (cmd->count(name)) field = cmd->get_option(name)->as<std::decay_t<decltype(field)>>();
  };
  get("--data", data_arg);
  get("--schema", schema_arg);
  get("--lr", cfg.learning_rate);
  get("--total-weight", cfg.total_weight);
  get("--max-steps", cfg.max_steps);
  get("--max-epochs", cfg.max_epochs);
  get("--eval-every", cfg.eval_every);
  get("--patience", cfg.patience);
  get("--batch-size", cfg.batch_size);
  get("--seed", cfg.seed);
  get("--split-train", fractions.train);
  get("--split-val", fractions.val);
  get("--split-test", fractions.test);
  get("--split-seed", split_seed);
  if (cmd->count("--strategy"))
    cfg.strategy.kind = strategy_from_string(cmd->get_option("--strategy")->as<std::string>());
  if (cmd->count("--metric"))
    cfg.metric = metric_kind_from_string(cmd->get_option("--metric")->as<std::string>());
  get("--beta", cfg.strategy.hyda.beta);
  if (cmd->count("--normalize-fake-grads"))
    cfg.strategy.hyda.normalize_fake_grads =
        cmd->get_option("--normalize-fake-grads")->as<bool>();
  if (cmd->count("--metric-set")) {
    const auto m = cmd->get_option("--metric-set")->as<std::string>();
    if (m == "validation") cfg.strategy.hyda.metric_dataset = MetricSet::validation;
    else if (m == "training") cfg.strategy.hyda.metric_dataset = MetricSet::training;
    else throw ConfigError("--metric-set must be validation or training");
  }
  if (cmd->count("--downscale"))
    cfg.strategy.hyda.downscale_total = cmd->get_option("--downscale")->as<bool>();
  get("--delta-floor", cfg.strategy.hyda.delta_floor);
  if (cmd->count("--literal-delta-sign")) cfg.strategy.hyda.literal_delta_sign = true;
  if (cmd->count("--literal-anchor")) cfg.strategy.hyda.literal_anchor = true;
  get("--metric-subsample", cfg.strategy.hyda.metric_subsample);
  get("--static-ratio", cfg.strategy.static_ratio);
  get("--olaux-period", cfg.strategy.olaux.period);
  get("--olaux-lr", cfg.strategy.olaux.weight_lr);
  get("--gradnorm-alpha", cfg.strategy.gradnorm.alpha);
  get("--gradnorm-lr", cfg.strategy.gradnorm.weight_lr);
  if (cmd->count("--encoder")) {
    arch.encoder_hidden.clear();
    for (double v : parse_double_list(cmd->get_option("--encoder")->as<std::string>()))
      arch.encoder_hidden.push_back(static_cast<Index>(v));
  }
  get("--head-hidden", arch.head_hidden);
  if (cmd->count("--activation"))
    arch.hidden_activation =
        activation_from_string(cmd->get_option("--activation")->as<std::string>());

  for (const auto& [flag, kind] : kStrategyFlags) {
    if (cmd->count(flag) && cfg.strategy.kind != kind)
      err << "warning: " << flag << " does not apply to strategy '"
          << to_string(cfg.strategy.kind) << "'; ignored\n";
  }

  if (data_arg.empty()) throw ConfigError("train: --data is required (field: data)");
  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  fs::create_directories(out_dir);

  DataSource src = resolve_data(data_arg, schema_arg, fractions, split_seed);
  const Dataset& train_set = src.splits.train;

  // classification targets get a sigmoid/BCE head and an AUC default metric
  const bool cls_main = train_set.task_main == TaskKind::classification;
  const bool cls_aux = train_set.task_aux == TaskKind::classification;
  if (cls_main) {
    arch.output_activation_main = Activation::sigmoid;
    if (!cmd->count("--metric")) cfg.metric = MetricKind::auc;
  }
  if (cls_aux) arch.output_activation_aux = Activation::sigmoid;

  ExperimentSpec netspec;
  netspec.arch = arch;
  netspec.data.input_dim = train_set.inputs.cols();
  netspec.data.output_dim = train_set.targets_main.cols();
  MultiTaskNet net = build_network(netspec, cfg.seed);
  if (train_set.targets_aux.cols() != train_set.targets_main.cols()) {
    // aux head with its own output width
    Rng rng = Rng(cfg.seed).fork(7777);
    Mlp head_aux = make_mlp(rng, {net.encoder().output_dim(), arch.head_hidden,
                                  train_set.targets_aux.cols()},
                            arch.hidden_activation, arch.output_activation_aux);
    MultiTaskNet rebuilt(net.encoder(), net.head(Task::main), std::move(head_aux),
                         Loss{cls_main ? LossKind::bce : LossKind::mse},
                         Loss{cls_aux ? LossKind::bce : LossKind::mse});
    net = std::move(rebuilt);
  } else if (cls_main || cls_aux) {
    MultiTaskNet rebuilt(net.encoder(), net.head(Task::main), net.head(Task::aux),
                         Loss{cls_main ? LossKind::bce : LossKind::mse},
                         Loss{cls_aux ? LossKind::bce : LossKind::mse});
    net = std::move(rebuilt);
  }

  // resolved-config echo: feeding this file back reproduces the run
  json echo{{"command", "train"},
            {"data_path", data_arg},
            {"schema_path", schema_arg},
            {"split",
             {{"train", fractions.train},
              {"val", fractions.val},
              {"test", fractions.test},
              {"seed", split_seed}}},
            {"architecture", to_json(arch)},
            {"train", to_json(cfg)}};
  write_json_file(echo, out_dir / "config.json");

  TrainResult result = train(net, src.splits.train, src.splits.val, src.splits.test, cfg);

  write_runlog_jsonl(result.log, out_dir / "runlog.jsonl");
  write_json_file(summary_to_json(result.log.summary, to_string(cfg.strategy.kind), cfg.seed),
                  out_dir / "summary.json");
  save_checkpoint(net, out_dir / "checkpoint.bin");

  out << "test " << to_string(cfg.metric) << " (main): "
      << fmt17(result.log.summary.test_metric_main) << "\n";
  out << "best val at step " << result.log.summary.best_step << ", stopped at step "
      << result.log.summary.stopped_step << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// suite / ablation / grid share the experiment-spec resolution

ExperimentSpec resolve_experiment(CLI::App* cmd) {
  ExperimentSpec spec;
  bool have = false;
  if (cmd->count("--spec")) {
    spec = experiment_from_json(read_json_file(cmd->get_option("--spec")->as<std::string>()));
    have = true;
  }
  if (cmd->count("--exp1")) {
    spec = ExperimentSpec::exp1();
    have = true;
  }
  if (cmd->count("--exp2")) {
    spec = ExperimentSpec::exp2();
    have = true;
  }
  if (!have) throw ConfigError("one of --exp1, --exp2 or --spec is required (field: spec)");
  if (cmd->count("--seeds")) spec.seeds = parse_seed_list(cmd->get_option("--seeds")->as<std::string>());
  const CLI::Option* strategies = cmd->get_option_no_throw("--strategies");
  if (strategies && strategies->count()) {
    spec.strategies.clear();
    std::stringstream ss(strategies->as<std::string>());
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) spec.strategies.push_back(strategy_from_string(item));
  }
  if (cmd->count("--jobs")) spec.jobs = cmd->get_option("--jobs")->as<long>();
  if (cmd->count("--max-epochs")) spec.train.max_epochs = cmd->get_option("--max-epochs")->as<long>();
  if (cmd->count("--max-steps")) spec.train.max_steps = cmd->get_option("--max-steps")->as<long>();
  if (cmd->count("--patience")) spec.train.patience = cmd->get_option("--patience")->as<long>();
  if (cmd->count("--lr")) spec.train.learning_rate = cmd->get_option("--lr")->as<double>();
  if (cmd->count("--beta")) spec.train.strategy.hyda.beta = cmd->get_option("--beta")->as<double>();
  return spec;
}

void add_experiment_flags(CLI::App* cmd) {
  cmd->add_flag("--exp1", "helpful-auxiliary toy experiment");
  cmd->add_flag("--exp2", "unrelated-auxiliary toy experiment");
  cmd->add_option("--spec", "experiment spec JSON file");
  cmd->add_option("--seeds", "comma-separated seed list");
  cmd->add_option("--jobs", "parallel runs (default: hardware)");
  cmd->add_option("--max-epochs", "override training epochs");
  cmd->add_option("--max-steps", "override training steps");
  cmd->add_option("--patience", "override early-stopping patience");
  cmd->add_option("--lr", "override learning rate");
  cmd->add_option("--beta", "override HydaLearn beta");
}

int cmd_suite(CLI::App& app, std::ostream& out) {
  auto* cmd = app.get_subcommand("suite");
  ExperimentSpec spec = resolve_experiment(cmd);
  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  const ResultTable table = run_suite(spec, out_dir / spec.name);
  {
    std::ofstream os(out_dir / spec.name / "spec.json", std::ios::binary);
    os << to_json(spec).dump(2) << "\n";
  }
  out << table.to_text();
  long failed = 0;
  for (const auto& c : table.cells)
    if (c.failed) ++failed;
  if (failed > 0) out << failed << " run(s) failed; see results.csv\n";
  return 0;
}

int cmd_ablation(CLI::App& app, std::ostream& out) {
  auto* cmd = app.get_subcommand("ablation");
  ExperimentSpec spec = resolve_experiment(cmd);
  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  const ResultTable table = run_ablation(spec, out_dir / (spec.name + "_ablation"));
  out << table.to_text();
  return 0;
}

int cmd_grid(CLI::App& app, std::ostream& out) {
  auto* cmd = app.get_subcommand("grid");
  ExperimentSpec spec = resolve_experiment(cmd);
  const StrategyKind strategy =
      strategy_from_string(cmd->get_option("--strategy")->as<std::string>());
  std::vector<GridAxis> grid;
  if (cmd->count("--lr-grid"))
    grid.push_back({"lr", parse_double_list(cmd->get_option("--lr-grid")->as<std::string>())});
  if (cmd->count("--as-grid"))
    grid.push_back({"as", parse_double_list(cmd->get_option("--as-grid")->as<std::string>())});
  if (grid.empty()) throw ConfigError("grid: at least one of --lr-grid/--as-grid is required");
  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  fs::create_directories(out_dir);
  const GridResult res = grid_search(spec, strategy, grid, out_dir);
  out << "best " << res.strategy << ": lr=" << fmt17(res.best.lr);
  if (res.best.strategy_param) out << " as=" << fmt17(*res.best.strategy_param);
  out << " val=" << fmt17(res.best.mean_val) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plotdata

int cmd_plotdata(CLI::App& app, std::ostream& out) {
  auto* cmd = app.get_subcommand("plotdata");
  const fs::path runs_dir = cmd->get_option("--runs")->as<std::string>();
  const fs::path out_dir = cmd->get_option("--out")->as<std::string>();
  if (!fs::is_directory(runs_dir)) throw ConfigError("plotdata: --runs is not a directory");
  fs::create_directories(out_dir);

  struct Run {
    std::string strategy;
    std::string seed;
    fs::path dir;
  };
  std::vector<Run> runs;
  for (const auto& strat_entry : fs::directory_iterator(runs_dir)) {
    if (!strat_entry.is_directory()) continue;
    for (const auto& seed_entry : fs::directory_iterator(strat_entry.path())) {
      if (!seed_entry.is_directory()) continue;
      if (fs::exists(seed_entry.path() / "runlog.jsonl"))
        runs.push_back({strat_entry.path().filename().string(),
                        seed_entry.path().filename().string(), seed_entry.path()});
    }
  }
  if (runs.empty()) throw ConfigError("plotdata: no runlog.jsonl found under " + runs_dir.string());
  std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
    return std::tie(a.strategy, a.seed) < std::tie(b.strategy, b.seed);
  });

  std::ofstream weights_os(out_dir / "weights_epoch.csv", std::ios::binary);
  std::ofstream curve_os(out_dir / "val_curve.csv", std::ios::binary);
  std::ofstream delta_os(out_dir / "deltas.csv", std::ios::binary);
  weights_os << "strategy,seed,epoch,mean_wa_over_W\n";
  curve_os << "strategy,seed,step,val_main,val_aux\n";
  delta_os << "strategy,seed,step,delta_mm,delta_ma\n";

  for (const auto& run : runs) {
    const RunLog log = read_runlog_jsonl(run.dir / "runlog.jsonl");
    const json cfg = read_json_file(run.dir / "config.json");
    const double total = cfg.at("train").value("total_weight", 2.0);
    long steps_per_epoch = 1;
    if (cfg.contains("data") && cfg["data"].contains("n_train")) {
      const long n_train = cfg["data"]["n_train"].get<long>();
      const long batch = cfg.at("train").value("batch_size", 16L);
      steps_per_epoch = (n_train + batch - 1) / batch;
    }
    long epoch = 0;
    double acc = 0.0;
    long count = 0;
    for (const auto& s : log.steps) {
      acc += s.w_aux / total;
      ++count;
      if (count == steps_per_epoch) {
        weights_os << run.strategy << "," << run.seed << "," << epoch << ","
                   << fmt17(acc / static_cast<double>(count)) << "\n";
        ++epoch;
        acc = 0.0;
        count = 0;
      }
    }
    if (count > 0)
      weights_os << run.strategy << "," << run.seed << "," << epoch << ","
                 << fmt17(acc / static_cast<double>(count)) << "\n";
    for (const auto& e : log.evals) {
      curve_os << run.strategy << "," << run.seed << "," << e.step << "," << fmt17(e.val_main)
               << "," << (std::isfinite(e.val_aux) ? fmt17(e.val_aux) : std::string()) << "\n";
    }
    for (const auto& s : log.steps)
      delta_os << run.strategy << "," << run.seed << "," << s.step << "," << fmt17(s.delta_mm)
               << "," << fmt17(s.delta_ma) << "\n";
  }
  out << "plot data for " << runs.size() << " run(s) -> " << out_dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"HydaLearn multi-task training engine"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "generate a synthetic dataset");
  generate->add_flag("--exp1", "helpful-auxiliary toy dataset");
  generate->add_flag("--exp2", "unrelated-auxiliary toy dataset");
  generate->add_option("--n-train", "training rows");
  generate->add_option("--n-val", "validation rows");
  generate->add_option("--n-test", "test rows");
  generate->add_option("--input-dim", "input dimension");
  generate->add_option("--output-dim", "output dimension");
  generate->add_option("--b-variance", "shared basis variance");
  generate->add_option("--eps-variance", "task component variance");
  generate->add_option("--sigma-main", "main task scale");
  generate->add_option("--sigma-aux", "aux task scale");
  generate->add_option("--noise-std", "target noise std (negative: 0.05*sigma)");
  generate->add_option("--projection-variance", "pre-tanh projection variance (negative: 1)");
  generate->add_option("--aux-mode", "related|unrelated");
  generate->add_option("--seed", "generation seed");
  generate->add_flag("--csv", "also write data.csv and schema.json");
  generate->add_option("--out", "output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "train one model");
  train_cmd->add_option("--data", "dataset dir, .bin or .csv");
  train_cmd->add_option("--schema", "schema JSON for CSV data");
  train_cmd->add_option("--config", "config JSON (flags override)");
  train_cmd->add_option("--strategy", "hydalearn|stl|static|gcosim|olaux|gradnorm");
  train_cmd->add_option("--metric", "mae|mse|auc");
  train_cmd->add_option("--lr", "learning rate");
  train_cmd->add_option("--total-weight", "task-weight budget W");
  train_cmd->add_option("--max-steps", "training steps (0: use epochs)");
  train_cmd->add_option("--max-epochs", "training epochs");
  train_cmd->add_option("--eval-every", "evaluation interval in steps (0: per epoch)");
  train_cmd->add_option("--patience", "early-stopping patience");
  train_cmd->add_option("--batch-size", "mini-batch size");
  train_cmd->add_option("--seed", "run seed");
  train_cmd->add_option("--beta", "HydaLearn gain-ratio exponent");
  train_cmd->add_option("--normalize-fake-grads", "HydaLearn: unit-norm fake gradients");
  train_cmd->add_option("--metric-set", "HydaLearn: validation|training");
  train_cmd->add_option("--downscale", "HydaLearn: budget down-scaling");
  train_cmd->add_option("--delta-floor", "HydaLearn: gain clamp floor");
  train_cmd->add_flag("--literal-delta-sign", "HydaLearn: raw gain sign, no orientation");
  train_cmd->add_flag("--literal-anchor", "HydaLearn: carried anchor of the published pseudocode");
  train_cmd->add_option("--metric-subsample", "HydaLearn: metric rows per fake update");
  train_cmd->add_option("--static-ratio", "static: w_main/w_aux");
  train_cmd->add_option("--olaux-period", "olaux: steps between weight updates");
  train_cmd->add_option("--olaux-lr", "olaux: weight learning rate");
  train_cmd->add_option("--gradnorm-alpha", "gradnorm: restoring-force exponent");
  train_cmd->add_option("--gradnorm-lr", "gradnorm: weight learning rate");
  train_cmd->add_option("--encoder", "encoder hidden sizes, comma-separated");
  train_cmd->add_option("--head-hidden", "head hidden size");
  train_cmd->add_option("--activation", "hidden activation");
  train_cmd->add_option("--split-train", "train fraction for unsplit data");
  train_cmd->add_option("--split-val", "val fraction");
  train_cmd->add_option("--split-test", "test fraction");
  train_cmd->add_option("--split-seed", "split shuffle seed");
  train_cmd->add_option("--out", "output directory")->required();

  auto* suite = app.add_subcommand("suite", "run strategies x seeds and aggregate");
  add_experiment_flags(suite);
  suite->add_option("--strategies", "comma-separated strategy list");
  suite->add_option("--out", "output directory")->required();

  auto* ablation = app.add_subcommand("ablation", "run the four component-impact arms");
  add_experiment_flags(ablation);
  ablation->add_option("--out", "output directory")->required();

  auto* grid = app.add_subcommand("grid", "hyperparameter grid search");
  add_experiment_flags(grid);
  grid->add_option("--strategy", "strategy to search")->required();
  grid->add_option("--lr-grid", "learning-rate values, comma-separated");
  grid->add_option("--as-grid", "strategy-specific values, comma-separated");
  grid->add_option("--out", "output directory")->required();

  auto* plotdata = app.add_subcommand("plotdata", "tidy CSVs from run logs");
  plotdata->add_option("--runs", "suite output directory")->required();
  plotdata->add_option("--out", "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (app.got_subcommand("generate")) return cmd_generate(app, out);
    if (app.got_subcommand("train")) return cmd_train(app, out, err);
    if (app.got_subcommand("suite")) return cmd_suite(app, out);
    if (app.got_subcommand("ablation")) return cmd_ablation(app, out);
    if (app.got_subcommand("grid")) return cmd_grid(app, out);
    if (app.got_subcommand("plotdata")) return cmd_plotdata(app, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace hyda
