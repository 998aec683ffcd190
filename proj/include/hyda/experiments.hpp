// hyda/experiments.hpp — pre-canned reproductions: the two toy experiments,
// the component-impact ablation, multi-seed aggregation and grid search.
#pragma once

#include "hyda/data.hpp"
#include "hyda/trainer.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hyda {

struct Architecture {
  std::vector<Index> encoder_hidden = {64, 64, 64, 64};
  Index head_hidden = 32;
  Activation hidden_activation = Activation::relu;
  Activation output_activation_main = Activation::identity;
  Activation output_activation_aux = Activation::identity;
};

struct ExperimentSpec {
  std::string name = "exp1";
  ToySpec data;  // per-seed data uses data.seed forked with the run seed
  Architecture arch;
  std::vector<StrategyKind> strategies = {StrategyKind::hydalearn, StrategyKind::stl,
                                          StrategyKind::static_weights, StrategyKind::gcosim,
                                          StrategyKind::olaux, StrategyKind::gradnorm};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TrainConfig train;  // strategy field is overwritten per run
  long jobs = 0;      // parallel (strategy, seed) cells; 0 = hardware

  static ExperimentSpec exp1();
  static ExperimentSpec exp2();
};

// Builds the per-seed network/data exactly once per seed so every strategy
// sees identical data, splits, initialization and batch order.
MultiTaskNet build_network(const ExperimentSpec& spec, std::uint64_t seed);
Splits build_splits(const ExperimentSpec& spec, std::uint64_t seed);

struct RunCell {
  std::string strategy;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double test_metric = 0.0;
  RunLog log;
};

struct StrategyAggregate {
  std::string strategy;
  long n = 0;
  double mean = 0.0;
  std::optional<double> stddev;  // absent below two seeds
  double median = 0.0;
};

struct ResultTable {
  std::vector<RunCell> cells;
  std::vector<StrategyAggregate> aggregates;

  std::string to_csv() const;
  std::string to_text() const;
};

ResultTable aggregate(std::vector<RunCell> cells);

// Runs strategies x seeds. When out_dir is set, each run's artifacts land in
// out_dir/<strategy>/seed_<seed>/ and the table in out_dir/.
ResultTable run_suite(const ExperimentSpec& spec,
                      const std::optional<std::filesystem::path>& out_dir = std::nullopt);

ResultTable run_exp1(const std::vector<std::uint64_t>& seeds,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);
ResultTable run_exp2(const std::vector<std::uint64_t>& seeds,
                     const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// The four component-impact arms, identical seeds, one toggled field each:
// arm 0 everything on; arm 1 no fake-gradient normalization; arm 2 gains on
// the training split; arm 3 no budget down-scaling.
std::vector<StrategyConfig> ablation_arms(const StrategyConfig& base);
ResultTable run_ablation(const ExperimentSpec& base,
                         const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct GridAxis {
  std::string name;  // "lr" or the strategy-specific parameter "as"
  std::vector<double> values;
};

struct GridCellResult {
  double lr = 0.0;
  std::optional<double> strategy_param;
  double mean_val = 0.0;   // validation metric at early stop, mean over seeds
  double mean_test = 0.0;
};

struct GridResult {
  std::string strategy;
  std::vector<GridCellResult> cells;
  GridCellResult best;
};

// Exhaustive search; selection by validation metric at early stop. The
// strategy-specific "as" axis maps to beta / static ratio / olaux period /
// gradnorm alpha; strategies without one ignore it.
GridResult grid_search(const ExperimentSpec& spec, StrategyKind strategy,
                       const std::vector<GridAxis>& grid,
                       const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Sample standard deviation (n-1); used by every aggregate in this module.
std::optional<double> sample_stddev(const std::vector<double>& xs);
double median(std::vector<double> xs);

}  // namespace hyda
