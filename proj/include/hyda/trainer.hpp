// hyda/trainer.hpp — the main training loop: per-step head updates, strategy
// invocation, shared-layer update, early stopping and run logging.
//
// Step order, every step: (1) sample batch; (2) both task gradients at the
// step-start parameters; (3) head updates; (4) strategy (fake updates for
// HydaLearn); (5) shared update with the weighted combination. Two backward
// passes per step, plus two metric evaluations for HydaLearn.
#pragma once

#include "hyda/data.hpp"
#include "hyda/multitask.hpp"
#include "hyda/weighting.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hyda {

struct TrainConfig {
  double learning_rate = 0.01;
  double total_weight = 2.0;
  long max_steps = 0;    // 0: derive from max_epochs
  long max_epochs = 30;
  long eval_every = 0;   // steps; 0: once per epoch
  long patience = 10;    // evaluations without improvement before stopping
  Index batch_size = 16;
  std::uint64_t seed = 1;
  StrategyConfig strategy;
  MetricKind metric = MetricKind::mae;
  // Escape hatch reproducing the published aux-head update base verbatim
  // (theta_a <- theta_m - alpha * grad); requires identical head shapes.
  bool aux_head_literal_base = false;
};

struct StepRecord {
  long step = 0;
  double w_main = 0.0;
  double w_aux = 0.0;
  double total_effective = 0.0;
  double delta_mm = 0.0;
  double delta_ma = 0.0;
  double loss_main = 0.0;
  double loss_aux = 0.0;
  double mu = 0.0;
};

struct EvalRecord {
  long step = 0;
  double val_main = 0.0;
  double val_aux = 0.0;  // NaN when not evaluable (e.g. single-class AUC)
};

struct RunSummary {
  double test_metric_main = 0.0;
  double best_val = 0.0;
  long best_step = 0;
  long stopped_step = 0;
  std::uint64_t dataset_checksum = 0;
  std::uint64_t init_param_checksum = 0;
  std::uint64_t final_param_checksum = 0;
};

struct RunLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  RunSummary summary;
};

void write_runlog_jsonl(const RunLog& log, const std::filesystem::path& path);
RunLog read_runlog_jsonl(const std::filesystem::path& path);

struct StopState {
  double best_val = 0.0;
  long best_step = -1;
  long patience_left = 0;
  ParamSnapshot best_params;
};

// true = keep training. Improvement (per orientation) resets patience and
// snapshots the parameters.
bool early_stop_update(StopState& stop, double val, long step, const MultiTaskNet& net,
                       double orientation_sign, long patience);

// Whole-split metric for the given task's predictions; parameters untouched.
double evaluate(const MultiTaskNet& net, const Dataset& split, const Metric& metric,
                Task task = Task::main);

// Production metric evaluator for HydaLearn's gain estimates: main-task
// metric over `metric_split`, optionally a fresh deterministic subsample per
// step.
MetricFn make_metric_evaluator(const Dataset& metric_split, const Metric& metric, long subsample,
                               std::uint64_t seed);

struct TrainResult {
  RunLog log;
  Metric metric;
};

struct TrainHooks {
  // Called after every completed step (post shared update).
  std::function<void(const MultiTaskNet&, const StepRecord&)> on_step;
  // Test-only override of the HydaLearn weighter (dependency injection).
  TaskWeighter* weighter_override = nullptr;
};

// Trains in place; `net` is left at the best early-stopping snapshot.
TrainResult train(MultiTaskNet& net, const Dataset& train_set, const Dataset& val_set,
                  const Dataset& test_set, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace hyda
