#include "hyda/experiments.hpp"

#include "hyda/config_json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace hyda {

using nlohmann::json;

namespace {

// Per-run-seed streams shared by every strategy in a suite.
constexpr std::uint64_t kStreamData = 201;
constexpr std::uint64_t kStreamInit = 202;
constexpr std::uint64_t kStreamBatchOrder = 203;

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentSpec ExperimentSpec::exp1() {
  ExperimentSpec spec;
  spec.name = "exp1";
  spec.data = ToySpec::exp1(1);
  spec.arch.encoder_hidden = {64, 64, 64, 64};
  spec.arch.head_hidden = 32;
  spec.train.learning_rate = 0.01;
  spec.train.total_weight = 2.0;
  spec.train.batch_size = 16;
  spec.train.metric = MetricKind::mae;
  spec.train.max_epochs = 12;
  spec.train.patience = 4;
  spec.train.strategy.hyda.beta = 6.0;
  spec.train.strategy.hyda.metric_subsample = 512;
  spec.train.strategy.static_ratio = 1.5;
  spec.train.strategy.olaux.period = 5;
  return spec;
}

ExperimentSpec ExperimentSpec::exp2() {
  ExperimentSpec spec = exp1();
  spec.name = "exp2";
  spec.data = ToySpec::exp2(1);
  spec.arch.encoder_hidden = {40, 40};
  spec.arch.head_hidden = 20;
  spec.train.max_epochs = 40;
  spec.train.patience = 8;
  spec.train.strategy.hyda.metric_subsample = 0;  // validation split is small
  return spec;
}

MultiTaskNet build_network(const ExperimentSpec& spec, std::uint64_t seed) {
  Rng init_rng = Rng(seed).fork(kStreamInit);
  std::vector<Index> enc_dims;
  enc_dims.push_back(spec.data.input_dim);
  for (Index h : spec.arch.encoder_hidden) enc_dims.push_back(h);
  Mlp encoder = make_mlp(init_rng, enc_dims, spec.arch.hidden_activation,
                         spec.arch.hidden_activation);

  const Index enc_out = enc_dims.back();
  Mlp head_main = make_mlp(init_rng, {enc_out, spec.arch.head_hidden, spec.data.output_dim},
                           spec.arch.hidden_activation, spec.arch.output_activation_main);
  Mlp head_aux = make_mlp(init_rng, {enc_out, spec.arch.head_hidden, spec.data.output_dim},
                          spec.arch.hidden_activation, spec.arch.output_activation_aux);
  return MultiTaskNet(std::move(encoder), std::move(head_main), std::move(head_aux),
                      Loss{LossKind::mse}, Loss{LossKind::mse});
}

Splits build_splits(const ExperimentSpec& spec, std::uint64_t seed) {
  ToySpec data_spec = spec.data;
  data_spec.seed = Rng(seed).fork(kStreamData).seed();
  const Dataset full = generate_toy(data_spec);
  return split_counts(full, data_spec.n_train, data_spec.n_val, data_spec.n_test);
}

std::optional<double> sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return std::nullopt;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw DomainError("median: empty");
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

ResultTable aggregate(std::vector<RunCell> cells) {
  ResultTable table;
  table.cells = std::move(cells);
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_strategy;
  for (const auto& c : table.cells) {
    if (!by_strategy.count(c.strategy)) order.push_back(c.strategy);
    if (!c.failed) by_strategy[c.strategy].push_back(c.test_metric);
    else by_strategy[c.strategy];
  }
  for (const auto& name : order) {
    const auto& xs = by_strategy[name];
    StrategyAggregate agg;
    agg.strategy = name;
    agg.n = static_cast<long>(xs.size());
    if (!xs.empty()) {
      for (double x : xs) agg.mean += x;
      agg.mean /= static_cast<double>(xs.size());
      agg.stddev = sample_stddev(xs);
      agg.median = median(xs);
    }
    table.aggregates.push_back(std::move(agg));
  }
  return table;
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "strategy,seed,status,test_metric\n";
  for (const auto& c : cells)
    os << c.strategy << "," << c.seed << "," << (c.failed ? "failed" : "ok") << ","
       << (c.failed ? "" : fmt17(c.test_metric)) << "\n";
  return os.str();
}

std::string ResultTable::to_text() const {
  std::ostringstream os;
  os << "| Model | Metric | Std Deviation |\n";
  os << "|-------|--------|---------------|\n";
  for (const auto& a : aggregates) {
    os << "| " << a.strategy << " | " << (a.n > 0 ? fmt6(a.mean) : std::string("failed")) << " | "
       << (a.stddev ? fmt6(*a.stddev) : std::string("-")) << " |\n";
  }
  return os.str();
}

namespace {

void persist_run(const std::filesystem::path& dir, const ExperimentSpec& spec,
                 const TrainConfig& cfg, const std::string& strategy, std::uint64_t seed,
                 const MultiTaskNet& net, const RunLog& log) {
  std::filesystem::create_directories(dir);
  write_runlog_jsonl(log, dir / "runlog.jsonl");
  {
    std::ofstream os(dir / "summary.json", std::ios::binary);
    os << summary_to_json(log.summary, strategy, seed).dump(2) << "\n";
  }
  {
    const json cfg_json{{"experiment", spec.name},
                        {"run_seed", seed},
                        {"data", to_json(spec.data)},
                        {"architecture", to_json(spec.arch)},
                        {"train", to_json(cfg)}};
    std::ofstream os(dir / "config.json", std::ios::binary);
    os << cfg_json.dump(2) << "\n";
  }
  save_checkpoint(net, dir / "checkpoint.bin");
}

RunCell run_one(const ExperimentSpec& spec, StrategyKind strategy, std::uint64_t seed,
                const std::optional<std::filesystem::path>& out_dir,
                const std::string& label = {}) {
  RunCell cell;
  cell.strategy = label.empty() ? to_string(strategy) : label;
  cell.seed = seed;
  try {
    const Splits splits = build_splits(spec, seed);
    MultiTaskNet net = build_network(spec, seed);
    TrainConfig cfg = spec.train;
    cfg.strategy.kind = strategy;
    cfg.seed = Rng(seed).fork(kStreamBatchOrder).seed();
    TrainResult result = train(net, splits.train, splits.val, splits.test, cfg);
    cell.test_metric = result.log.summary.test_metric_main;
    cell.log = std::move(result.log);
    if (out_dir) {
      const auto dir = *out_dir / cell.strategy / ("seed_" + std::to_string(seed));
      persist_run(dir, spec, cfg, cell.strategy, seed, net, cell.log);
    }
  } catch (const std::exception& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

template <class Job>
std::vector<RunCell> run_cells(long jobs, const std::vector<Job>& work) {
  long n_jobs = jobs > 0 ? jobs : static_cast<long>(std::thread::hardware_concurrency());
  n_jobs = std::max(1L, std::min<long>(n_jobs, static_cast<long>(work.size())));
  std::vector<RunCell> cells(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= work.size()) return;
      cells[i] = work[i]();
    }
  };
  std::vector<std::thread> pool;
  for (long t = 1; t < n_jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return cells;
}

void persist_table(const ResultTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "results.csv", std::ios::binary);
    os << table.to_csv();
  }
  {
    std::ofstream os(dir / "results.txt", std::ios::binary);
    os << table.to_text();
  }
}

}  // namespace

ResultTable run_suite(const ExperimentSpec& spec,
                      const std::optional<std::filesystem::path>& out_dir) {
  std::vector<std::function<RunCell()>> work;
  for (StrategyKind strategy : spec.strategies)
    for (std::uint64_t seed : spec.seeds)
      work.push_back([&spec, strategy, seed, &out_dir] { return run_one(spec, strategy, seed, out_dir); });
  ResultTable table = aggregate(run_cells(spec.jobs, work));
  if (out_dir) persist_table(table, *out_dir);
  return table;
}

ResultTable run_exp1(const std::vector<std::uint64_t>& seeds,
                     const std::optional<std::filesystem::path>& out_dir) {
  ExperimentSpec spec = ExperimentSpec::exp1();
  if (!seeds.empty()) spec.seeds = seeds;
  return run_suite(spec, out_dir);
}

ResultTable run_exp2(const std::vector<std::uint64_t>& seeds,
                     const std::optional<std::filesystem::path>& out_dir) {
  ExperimentSpec spec = ExperimentSpec::exp2();
  if (!seeds.empty()) spec.seeds = seeds;
  return run_suite(spec, out_dir);
}

std::vector<StrategyConfig> ablation_arms(const StrategyConfig& base) {
  if (base.kind != StrategyKind::hydalearn)
    throw ConfigError("ablation: base strategy must be hydalearn");
  StrategyConfig arm0 = base;
  // Arms must differ from arm 0 in exactly one field, and the training-set
  // arm is defined over the whole split, so the base drops any subsampling.
  arm0.hyda.metric_subsample = 0;
  arm0.hyda.normalize_fake_grads = true;
  arm0.hyda.metric_dataset = MetricSet::validation;
  arm0.hyda.downscale_total = true;
  std::vector<StrategyConfig> arms(4, arm0);
  arms[1].hyda.normalize_fake_grads = false;
  arms[2].hyda.metric_dataset = MetricSet::training;
  arms[3].hyda.downscale_total = false;
  return arms;
}

ResultTable run_ablation(const ExperimentSpec& base,
                         const std::optional<std::filesystem::path>& out_dir) {
  ExperimentSpec spec = base;
  spec.train.strategy.kind = StrategyKind::hydalearn;
  const std::vector<StrategyConfig> arms = ablation_arms(spec.train.strategy);

  std::vector<std::function<RunCell()>> work;
  for (std::size_t arm = 0; arm < arms.size(); ++arm) {
    for (std::uint64_t seed : spec.seeds) {
      work.push_back([&spec, &arms, arm, seed, &out_dir] {
        ExperimentSpec arm_spec = spec;
        arm_spec.train.strategy = arms[arm];
        return run_one(arm_spec, StrategyKind::hydalearn, seed, out_dir,
                       "ExpImp-" + std::to_string(arm));
      });
    }
  }
  ResultTable table = aggregate(run_cells(spec.jobs, work));
  if (out_dir) {
    persist_table(table, *out_dir);
    for (std::size_t arm = 0; arm < arms.size(); ++arm) {
      json j = to_json(arms[arm]);
      std::ofstream os(*out_dir / ("ExpImp-" + std::to_string(arm) + ".config.json"),
                       std::ios::binary);
      os << j.dump(2) << "\n";
    }
  }
  return table;
}

GridResult grid_search(const ExperimentSpec& spec, StrategyKind strategy,
                       const std::vector<GridAxis>& grid,
                       const std::optional<std::filesystem::path>& out_dir) {
  std::vector<double> lrs{spec.train.learning_rate};
  std::optional<std::vector<double>> params;
  for (const auto& axis : grid) {
    if (axis.name == "lr")
      lrs = axis.values;
    else if (axis.name == "as")
      params = axis.values;
    else
      throw ConfigError("grid: unknown axis: " + axis.name);
  }
  if (lrs.empty() || (params && params->empty())) throw ConfigError("grid: empty axis");

  const Metric metric = make_metric(spec.train.metric);

  struct Cell {
    double lr;
    std::optional<double> param;
  };
  std::vector<Cell> cells;
  for (double lr : lrs) {
    if (params)
      for (double p : *params) cells.push_back({lr, p});
    else
      cells.push_back({lr, std::nullopt});
  }

  GridResult result;
  result.strategy = to_string(strategy);
  for (const auto& cell : cells) {
    ExperimentSpec cell_spec = spec;
    cell_spec.train.learning_rate = cell.lr;
    cell_spec.train.strategy.kind = strategy;
    if (cell.param) {
      switch (strategy) {
        case StrategyKind::hydalearn: cell_spec.train.strategy.hyda.beta = *cell.param; break;
        case StrategyKind::static_weights: cell_spec.train.strategy.static_ratio = *cell.param; break;
        case StrategyKind::olaux:
          cell_spec.train.strategy.olaux.period = static_cast<long>(*cell.param);
          break;
        case StrategyKind::gradnorm: cell_spec.train.strategy.gradnorm.alpha = *cell.param; break;
        case StrategyKind::stl:
        case StrategyKind::gcosim: break;  // no strategy-specific parameter
      }
    }
    cell_spec.strategies = {strategy};
    const ResultTable table = run_suite(cell_spec, std::nullopt);

    GridCellResult r;
    r.lr = cell.lr;
    r.strategy_param = cell.param;
    std::vector<double> vals, tests;
    for (const auto& c : table.cells) {
      if (c.failed) continue;
      vals.push_back(c.log.summary.best_val);
      tests.push_back(c.test_metric);
    }
    if (vals.empty()) continue;
    for (double v : vals) r.mean_val += v;
    r.mean_val /= static_cast<double>(vals.size());
    for (double v : tests) r.mean_test += v;
    r.mean_test /= static_cast<double>(tests.size());
    result.cells.push_back(r);
  }
  if (result.cells.empty()) throw ConfigError("grid: every cell failed");

  const double orient = metric.orientation_sign();
  result.best = *std::max_element(result.cells.begin(), result.cells.end(),
                                  [orient](const GridCellResult& a, const GridCellResult& b) {
                                    return orient * a.mean_val < orient * b.mean_val;
                                  });

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    std::ofstream os(*out_dir / ("grid_" + result.strategy + ".csv"), std::ios::binary);
    os << "lr,as,mean_val,mean_test\n";
    for (const auto& c : result.cells)
      os << fmt17(c.lr) << "," << (c.strategy_param ? fmt17(*c.strategy_param) : std::string())
         << "," << fmt17(c.mean_val) << "," << fmt17(c.mean_test) << "\n";
    json best{{"strategy", result.strategy},
              {"lr", result.best.lr},
              {"mean_val", result.best.mean_val},
              {"mean_test", result.best.mean_test}};
    if (result.best.strategy_param) best["as"] = *result.best.strategy_param;
    std::ofstream ob(*out_dir / ("grid_" + result.strategy + "_best.json"), std::ios::binary);
    ob << best.dump(2) << "\n";
  }
  return result;
}

}  // namespace hyda
