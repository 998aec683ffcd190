// hyda/weighting.hpp — task-weighting strategies.
//
// HydaLearn computes per-mini-batch weights from metric-gain estimates: two
// provisional ("fake") gradient steps on the shared parameters, one per task
// loss, each scored by the main-task metric and rolled back. The gain ratio,
// sharpened by an exponent, fixes w_main/w_aux; the budget w_main + w_aux = W
// fixes their scale. Five baselines share the same step interface.
#pragma once

#include "hyda/multitask.hpp"
#include "hyda/nn.hpp"
#include "hyda/types.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace hyda {

struct WeightState {
  double w_main = 1.0;
  double w_aux = 1.0;
  double total = 2.0;   // the budget W
  double mu = 0.0;      // metric anchor
  long step = 0;
};

// Oriented gains: positive always means the metric improved.
struct DeltaPair {
  double delta_mm = 0.0;  // gain after the main-loss fake update
  double delta_ma = 0.0;  // gain after the aux-loss fake update
  double mu_mm = 0.0;     // raw metric after the main-loss fake update
  double mu_ma = 0.0;     // raw metric after the aux-loss fake update
};

enum class MetricSet { validation, training };

struct HydaConfig {
  double beta = 1.0;                 // exponent on the gain ratio
  bool normalize_fake_grads = true;  // unit-L2 shared gradient for fake steps only
  MetricSet metric_dataset = MetricSet::validation;
  bool downscale_total = true;       // shrink W when both gains are negative
  double delta_floor = 1e-12;        // clamp for non-positive gains
  bool literal_delta_sign = false;   // raw (mu_new - mu_anchor), no orientation
  long metric_subsample = 0;         // 0 = whole split
  // Anchor for the gains. Fresh (default): the metric at the step-start
  // parameters, re-evaluated each step on the same rows as the fake updates,
  // so both gains measure pure fake-step effects (one extra metric
  // evaluation). Literal: the carried anchor of the published pseudocode —
  // the better fake outcome of the previous step — which mixes between-step
  // progress into both gains and washes out their ratio.
  bool literal_anchor = false;
};

// Evaluates the main-task metric for the current parameters; `step` selects
// the deterministic subsample when one is configured.
using MetricFn = std::function<double(const MultiTaskNet&, long step)>;

// w_main = total * ratio/(1+ratio), w_aux = total/(1+ratio). Shared by every
// ratio-based strategy so equal inputs give bit-equal weights.
std::pair<double, double> weights_from_ratio(double ratio, double total);

// w_main * grad_main + w_aux * grad_aux, skipping zero-weighted terms.
Vector combine_shared(double w_main, const Vector& grad_main, double w_aux,
                      const Vector* grad_aux);

struct HydaStepResult {
  WeightState state;
  DeltaPair deltas;
  double total_effective = 0.0;  // W, or the down-scaled W' when both gains < 0
  Vector combined_shared;
};

// One HydaLearn weight computation. Preconditions: the task heads have
// already been updated for this step, and both bundles were taken at the
// step-start parameters. Fake updates touch only the shared group and are
// rolled back bit-exactly. Cost: zero extra backward passes, two metric
// evaluations.
HydaStepResult hydalearn_step(MultiTaskNet& net, const GradientBundle& main_grads,
                              const GradientBundle& aux_grads, const MetricFn& metric_fn,
                              double metric_orientation_sign, const WeightState& state,
                              const HydaConfig& cfg, double learning_rate);

// Constant weights with w_main/w_aux = ratio and w_main + w_aux = total.
struct StaticStepResult {
  WeightState state;
  Vector combined_shared;
};
StaticStepResult static_step(const GradientBundle& main_grads, const GradientBundle& aux_grads,
                             double ratio, double total, long step);

// Main task only: w_main = total, w_aux = 0, aux head never trained.
StaticStepResult stl_step(const GradientBundle& main_grads, double total, long step);

// Adds the aux gradient only when its cosine similarity with the main
// gradient is strictly positive; zero-norm gradients count as similarity 0.
StaticStepResult gcosim_step(const GradientBundle& main_grads, const GradientBundle& aux_grads,
                             long step);

struct OlauxConfig {
  long period = 5;        // steps between weight updates
  double weight_lr = 0.1; // eta_w
};

struct OlauxState {
  double w_aux = 1.0;
  std::deque<Vector> past_aux_grads;  // at most `period` entries
};

// Every `period` steps: w_aux += weight_lr * alpha * sum over the history of
// <fresh main shared grad, past aux shared grad>, floored at zero. w_main is
// pinned at total/2.
StaticStepResult olaux_step(OlauxState& state, const GradientBundle& main_grads,
                            const GradientBundle& aux_grads, const OlauxConfig& cfg,
                            double learning_rate, double total, long step);

struct GradnormConfig {
  double alpha = 1.5;      // restoring-force exponent on relative training rates
  double weight_lr = 0.025;
  double loss_floor = 1e-12;
};

struct GradnormState {
  double w_main = 1.0;
  double w_aux = 1.0;
  std::optional<std::pair<double, double>> initial_losses;
};

// Gradient-norm balancing: per-task norms are measured on the last shared
// layer's slice of the shared gradient, targets are mean-norm times the
// relative inverse training rate to the alpha power, and one signed step
// moves the weights toward the targets before renormalizing to the budget.
StaticStepResult gradnorm_step(GradnormState& state, const MultiTaskNet& net,
                               const GradientBundle& main_grads, const GradientBundle& aux_grads,
                               double loss_main, double loss_aux, const GradnormConfig& cfg,
                               double total, long step);

// ---------------------------------------------------------------------------
// Strategy objects for the trainer.

enum class StrategyKind { hydalearn, stl, static_weights, gcosim, olaux, gradnorm };

const char* to_string(StrategyKind k);
StrategyKind strategy_from_string(const std::string& s);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::static_weights;
  HydaConfig hyda;
  double static_ratio = 1.0;
  OlauxConfig olaux;
  GradnormConfig gradnorm;
};

struct WeighterStep {
  WeightState state;
  std::optional<DeltaPair> deltas;
  double total_effective = 0.0;
  Vector combined_shared;
};

class TaskWeighter {
 public:
  virtual ~TaskWeighter() = default;
  virtual bool trains_aux_head() const { return true; }
  virtual bool needs_aux_gradients() const { return true; }
  // Bundles were computed at the step-start parameters; heads are already
  // updated. `net` is mutable only for fake updates, which must roll back.
  virtual WeighterStep step(MultiTaskNet& net, const GradientBundle& main_grads,
                            const GradientBundle* aux_grads, double loss_main, double loss_aux,
                            long step_index) = 0;
};

class HydaLearnWeighter : public TaskWeighter {
 public:
  HydaLearnWeighter(HydaConfig cfg, MetricFn metric_fn, double orientation_sign, double total,
                    double learning_rate, double initial_mu);
  WeighterStep step(MultiTaskNet& net, const GradientBundle& main_grads,
                    const GradientBundle* aux_grads, double loss_main, double loss_aux,
                    long step_index) override;
  const WeightState& state() const { return state_; }

 private:
  HydaConfig cfg_;
  MetricFn metric_fn_;
  double orientation_sign_;
  double learning_rate_;
  WeightState state_;
};

std::unique_ptr<TaskWeighter> make_weighter(const StrategyConfig& cfg, double total,
                                            double learning_rate, const MetricFn& metric_fn,
                                            double orientation_sign, double initial_mu);

}  // namespace hyda
