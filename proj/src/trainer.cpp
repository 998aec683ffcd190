#include "hyda/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hyda {

using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamBatches = 101;
constexpr std::uint64_t kStreamMetricSubsample = 102;

json step_to_json(const StepRecord& r) {
  return json{{"type", "step"},       {"step", r.step},
              {"w_m", r.w_main},      {"w_a", r.w_aux},
              {"W_eff", r.total_effective}, {"delta_mm", r.delta_mm},
              {"delta_ma", r.delta_ma},     {"loss_m", r.loss_main},
              {"loss_a", r.loss_aux},       {"mu", r.mu}};
}

json eval_to_json(const EvalRecord& r) {
  json j{{"type", "eval"}, {"step", r.step}, {"val_main", r.val_main}};
  if (std::isfinite(r.val_aux))
    j["val_aux"] = r.val_aux;
  else
    j["val_aux"] = nullptr;
  return j;
}

}  // namespace

void write_runlog_jsonl(const RunLog& log, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("runlog: cannot write: " + path.string());
  for (const auto& s : log.steps) os << step_to_json(s).dump() << "\n";
  for (const auto& e : log.evals) os << eval_to_json(e).dump() << "\n";
}

RunLog read_runlog_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("runlog: cannot open: " + path.string());
  RunLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "step") {
      StepRecord r;
      r.step = j.at("step").get<long>();
      r.w_main = j.at("w_m").get<double>();
      r.w_aux = j.at("w_a").get<double>();
      r.total_effective = j.at("W_eff").get<double>();
      r.delta_mm = j.at("delta_mm").get<double>();
      r.delta_ma = j.at("delta_ma").get<double>();
      r.loss_main = j.at("loss_m").get<double>();
      r.loss_aux = j.at("loss_a").get<double>();
      r.mu = j.at("mu").get<double>();
      log.steps.push_back(r);
    } else if (type == "eval") {
      EvalRecord r;
      r.step = j.at("step").get<long>();
      r.val_main = j.at("val_main").get<double>();
      r.val_aux = j.at("val_aux").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                            : j.at("val_aux").get<double>();
      log.evals.push_back(r);
    }
  }
  return log;
}

bool early_stop_update(StopState& stop, double val, long step, const MultiTaskNet& net,
                       double orientation_sign, long patience) {
  const bool improved =
      stop.best_step < 0 || orientation_sign * (val - stop.best_val) > 0.0;
  if (improved) {
    stop.best_val = val;
    stop.best_step = step;
    stop.patience_left = patience;
    stop.best_params = snapshot(net, kAllGroups);
    return true;
  }
  --stop.patience_left;
  return stop.patience_left > 0;
}

double evaluate(const MultiTaskNet& net, const Dataset& split, const Metric& metric, Task task) {
  if (split.rows() == 0) throw ConfigError("evaluate: empty split");
  Batch all;
  all.inputs = split.inputs;
  all.targets_main = split.targets_main;
  all.targets_aux = split.targets_aux;
  const Matrix pred = task_forward(net, all, task).pred;
  ++net.counters().metric_evals;
  return metric_value(metric, pred, task == Task::main ? split.targets_main : split.targets_aux);
}

MetricFn make_metric_evaluator(const Dataset& metric_split, const Metric& metric, long subsample,
                               std::uint64_t seed) {
  if (subsample <= 0 || subsample >= metric_split.rows()) {
    return [&metric_split, metric](const MultiTaskNet& net, long) {
      return evaluate(net, metric_split, metric, Task::main);
    };
  }
  return [&metric_split, metric, subsample, seed](const MultiTaskNet& net, long step) {
    // Fresh deterministic subsample per step.
    Rng rng = Rng(seed).fork(kStreamMetricSubsample).fork(static_cast<std::uint64_t>(step));
    std::vector<Index> rows(static_cast<std::size_t>(subsample));
    for (auto& r : rows) r = rng.next_index(metric_split.rows());
    const Dataset sub = select_rows(metric_split, rows);
    return evaluate(net, sub, metric, Task::main);
  };
}

TrainResult train(MultiTaskNet& net, const Dataset& train_set, const Dataset& val_set,
                  const Dataset& test_set, const TrainConfig& cfg, const TrainHooks& hooks) {
  if (cfg.learning_rate <= 0.0) throw ConfigError("train: learning rate must be positive");
  if (cfg.patience < 1) throw ConfigError("train: patience must be >= 1");

  const Metric metric = make_metric(cfg.metric);
  const double orient = metric.orientation_sign();

  SplitBatcher batcher(train_set, cfg.batch_size,
                       Rng(cfg.seed).fork(kStreamBatches).seed());
  const long steps_per_epoch = batcher.steps_per_epoch();
  const long max_steps = cfg.max_steps > 0 ? cfg.max_steps : cfg.max_epochs * steps_per_epoch;
  const long eval_every = cfg.eval_every > 0 ? cfg.eval_every : steps_per_epoch;

  TrainResult result;
  result.metric = metric;
  RunLog& log = result.log;
  log.summary.dataset_checksum = train_set.checksum();
  log.summary.init_param_checksum = net.params_checksum();

  const Dataset& hyda_metric_split =
      cfg.strategy.hyda.metric_dataset == MetricSet::training ? train_set : val_set;
  MetricFn metric_fn = make_metric_evaluator(hyda_metric_split, metric,
                                             cfg.strategy.hyda.metric_subsample, cfg.seed);

  std::unique_ptr<TaskWeighter> owned_weighter;
  TaskWeighter* weighter = hooks.weighter_override;
  if (!weighter) {
    double initial_mu = 0.0;
    if (cfg.strategy.kind == StrategyKind::hydalearn) {
      try {
        initial_mu = metric_fn(net, 0);  // mu_0: the metric at theta_0
      } catch (const MetricError& e) {
        throw TrainError(std::string("train: metric degenerate at initialization: ") + e.what());
      }
    }
    owned_weighter = make_weighter(cfg.strategy, cfg.total_weight, cfg.learning_rate, metric_fn,
                                   orient, initial_mu);
    weighter = owned_weighter.get();
  }

  if (cfg.aux_head_literal_base &&
      net.head(Task::main).param_count() != net.head(Task::aux).param_count())
    throw ConfigError("train: aux_head_literal_base requires identically shaped heads");

  StopState stop;
  {
    double val0;
    try {
      val0 = evaluate(net, val_set, metric, Task::main);
    } catch (const MetricError& e) {
      throw TrainError(std::string("train: validation metric degenerate: ") + e.what());
    }
    early_stop_update(stop, val0, 0, net, orient, cfg.patience);
    log.evals.push_back({0, val0, std::numeric_limits<double>::quiet_NaN()});
  }

  long step = 0;
  bool keep_going = true;
  while (keep_going && step < max_steps) {
    ++step;
    const Batch batch = batcher.next_batch();

    // Both gradients at the step-start parameters.
    auto [loss_m, bundle_m] = task_gradients(net, batch, Task::main);
    double loss_a = 0.0;
    std::optional<GradientBundle> bundle_a;
    if (weighter->needs_aux_gradients() || weighter->trains_aux_head()) {
      auto [la, ba] = task_gradients(net, batch, Task::aux);
      loss_a = la;
      bundle_a = std::move(ba);
    }

    if (!std::isfinite(loss_m) || !std::isfinite(loss_a)) {
      StepRecord diag;
      diag.step = step;
      diag.loss_main = loss_m;
      diag.loss_aux = loss_a;
      log.steps.push_back(diag);
      std::ostringstream oss;
      oss << "train: non-finite loss at step " << step << " (main=" << loss_m
          << ", aux=" << loss_a << ")";
      throw TrainError(oss.str());
    }

    // Heads first (three-phase backward pass order).
    const std::uint64_t rev_s_before = net.encoder().revision();
    std::optional<Vector> main_head_at_step_start;
    if (cfg.aux_head_literal_base && weighter->trains_aux_head())
      main_head_at_step_start = net.head(Task::main).flat_params();
    apply_update(net, ParamGroup::head_main, *bundle_m.grad_main, cfg.learning_rate);
    if (weighter->trains_aux_head()) {
      if (cfg.aux_head_literal_base) {
        // Published form: the aux head steps from the step-start main head.
        Mlp& aux_head = net.group(ParamGroup::head_aux);
        aux_head.set_flat_params(*main_head_at_step_start);
        aux_head.add_scaled(*bundle_a->grad_aux, -cfg.learning_rate);
      } else {
        apply_update(net, ParamGroup::head_aux, *bundle_a->grad_aux, cfg.learning_rate);
      }
    }
    if (net.encoder().revision() != rev_s_before)
      throw ContractError("train: shared parameters changed during the head phase");

    WeighterStep ws;
    try {
      ws = weighter->step(net, bundle_m, bundle_a ? &*bundle_a : nullptr, loss_m, loss_a, step);
    } catch (const StrategyError& e) {
      throw TrainError(std::string("train: ") + e.what());
    }
    apply_update(net, ParamGroup::shared, ws.combined_shared, cfg.learning_rate);

    StepRecord rec;
    rec.step = step;
    rec.w_main = ws.state.w_main;
    rec.w_aux = ws.state.w_aux;
    rec.total_effective = ws.total_effective;
    rec.delta_mm = ws.deltas ? ws.deltas->delta_mm : 0.0;
    rec.delta_ma = ws.deltas ? ws.deltas->delta_ma : 0.0;
    rec.loss_main = loss_m;
    rec.loss_aux = loss_a;
    rec.mu = ws.state.mu;
    log.steps.push_back(rec);
    if (hooks.on_step) hooks.on_step(net, rec);

    if (step % eval_every == 0) {
      double val;
      try {
        val = evaluate(net, val_set, metric, Task::main);
      } catch (const MetricError& e) {
        throw TrainError(std::string("train: validation metric degenerate: ") + e.what());
      }
      EvalRecord er;
      er.step = step;
      er.val_main = val;
      er.val_aux = std::numeric_limits<double>::quiet_NaN();
      try {
        const Metric aux_metric =
            make_metric(val_set.task_aux == TaskKind::classification ? MetricKind::auc : cfg.metric);
        er.val_aux = evaluate(net, val_set, aux_metric, Task::aux);
      } catch (const MetricError&) {
        // aux metric is informational only
      }
      log.evals.push_back(er);
      keep_going = early_stop_update(stop, val, step, net, orient, cfg.patience);
    }
  }

  restore(net, stop.best_params);
  log.summary.best_val = stop.best_val;
  log.summary.best_step = stop.best_step;
  log.summary.stopped_step = step;
  log.summary.final_param_checksum = net.params_checksum();
  log.summary.test_metric_main = evaluate(net, test_set, metric, Task::main);
  return result;
}

}  // namespace hyda
