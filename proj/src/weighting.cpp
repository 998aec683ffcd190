#include "hyda/weighting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hyda {

std::pair<double, double> weights_from_ratio(double ratio, double total) {
  const double w_main = total * ratio / (1.0 + ratio);
  const double w_aux = total / (1.0 + ratio);
  return {w_main, w_aux};
}

Vector combine_shared(double w_main, const Vector& grad_main, double w_aux,
                      const Vector* grad_aux) {
  Vector out = w_main * grad_main;
  if (grad_aux && w_aux != 0.0) out += w_aux * (*grad_aux);
  return out;
}

HydaStepResult hydalearn_step(MultiTaskNet& net, const GradientBundle& main_grads,
                              const GradientBundle& aux_grads, const MetricFn& metric_fn,
                              double metric_orientation_sign, const WeightState& state,
                              const HydaConfig& cfg, double learning_rate) {
  const ParamSnapshot shared_snap = snapshot(net, group_bit(ParamGroup::shared));

  auto guarded_metric = [&](const char* what) {
    try {
      return metric_fn(net, state.step + 1);
    } catch (const MetricError& e) {
      restore(net, shared_snap);
      std::ostringstream oss;
      oss << "hydalearn: metric degenerate during " << what << " at step " << state.step + 1
          << ": " << e.what();
      throw StrategyError(oss.str());
    }
  };

  auto fake_update_metric = [&](const Vector& shared_grad) {
    Vector direction = shared_grad;
    if (cfg.normalize_fake_grads) {
      const double norm = l2_norm(direction);
      if (norm > 0.0) direction /= norm;
    }
    apply_update(net, ParamGroup::shared, direction, learning_rate);
    const double mu = guarded_metric("fake update");
    restore(net, shared_snap);
    return mu;
  };

  // The anchor both gains are measured against. Fresh mode evaluates the
  // step-start parameters on the same rows the fake updates will use, so the
  // gain difference isolates the fake-step effects.
  const double mu_anchor = cfg.literal_anchor ? state.mu : guarded_metric("anchor evaluation");

  DeltaPair d;
  d.mu_mm = fake_update_metric(main_grads.grad_shared);
  d.mu_ma = fake_update_metric(aux_grads.grad_shared);

  const double sign = cfg.literal_delta_sign ? 1.0 : metric_orientation_sign;
  d.delta_mm = sign * (d.mu_mm - mu_anchor);
  d.delta_ma = sign * (d.mu_ma - mu_anchor);

  // Ratio of gains, exponent-sharpened. Non-positive gains are clamped at the
  // floor; when both are non-positive the ratio runs on magnitudes, and the
  // budget is down-scaled to W' = W / (1 + exp(-w_aux/w_main)) when both are
  // strictly negative.
  const bool both_nonpositive = d.delta_mm <= 0.0 && d.delta_ma <= 0.0;
  double ratio;
  if (both_nonpositive) {
    ratio = std::pow(std::max(std::abs(d.delta_mm), cfg.delta_floor) /
                         std::max(std::abs(d.delta_ma), cfg.delta_floor),
                     cfg.beta);
  } else {
    ratio = std::pow(std::max(d.delta_mm, cfg.delta_floor) /
                         std::max(d.delta_ma, cfg.delta_floor),
                     cfg.beta);
  }

  // Finite, strictly positive ratio even for extreme gains and exponents.
  ratio = std::clamp(ratio, 1e-300, 1e300);

  double total_eff = state.total;
  if (cfg.downscale_total && d.delta_mm < 0.0 && d.delta_ma < 0.0)
    total_eff = state.total / (1.0 + std::exp(-1.0 / ratio));

  auto [w_main, w_aux] = weights_from_ratio(ratio, total_eff);

  HydaStepResult out;
  out.deltas = d;
  out.total_effective = total_eff;
  out.state = state;
  out.state.w_main = w_main;
  out.state.w_aux = w_aux;
  out.state.step = state.step + 1;
  // Literal mode carries the better fake outcome forward as the next anchor
  // (the published if/else); fresh mode logs the baseline it measured from.
  if (cfg.literal_anchor)
    out.state.mu = d.delta_mm >= d.delta_ma ? d.mu_mm : d.mu_ma;
  else
    out.state.mu = mu_anchor;
  out.combined_shared = combine_shared(w_main, main_grads.grad_shared, w_aux,
                                       &aux_grads.grad_shared);
  return out;
}

StaticStepResult static_step(const GradientBundle& main_grads, const GradientBundle& aux_grads,
                             double ratio, double total, long step) {
  if (ratio <= 0.0) throw ConfigError("static_step: ratio must be positive");
  auto [w_main, w_aux] = weights_from_ratio(ratio, total);
  StaticStepResult out;
  out.state = WeightState{w_main, w_aux, total, 0.0, step};
  out.combined_shared = combine_shared(w_main, main_grads.grad_shared, w_aux,
                                       &aux_grads.grad_shared);
  return out;
}

StaticStepResult stl_step(const GradientBundle& main_grads, double total, long step) {
  StaticStepResult out;
  out.state = WeightState{total, 0.0, total, 0.0, step};
  out.combined_shared = combine_shared(total, main_grads.grad_shared, 0.0, nullptr);
  return out;
}

StaticStepResult gcosim_step(const GradientBundle& main_grads, const GradientBundle& aux_grads,
                             long step) {
  const double norm_m = l2_norm(main_grads.grad_shared);
  const double norm_a = l2_norm(aux_grads.grad_shared);
  double cos = 0.0;
  if (norm_m > 0.0 && norm_a > 0.0)
    cos = main_grads.grad_shared.dot(aux_grads.grad_shared) / (norm_m * norm_a);
  const double w_aux = cos > 0.0 ? 1.0 : 0.0;
  StaticStepResult out;
  out.state = WeightState{1.0, w_aux, 1.0 + w_aux, 0.0, step};
  out.combined_shared =
      combine_shared(1.0, main_grads.grad_shared, w_aux, &aux_grads.grad_shared);
  return out;
}

StaticStepResult olaux_step(OlauxState& state, const GradientBundle& main_grads,
                            const GradientBundle& aux_grads, const OlauxConfig& cfg,
                            double learning_rate, double total, long step) {
  if (cfg.period < 1) throw ConfigError("olaux: period must be >= 1");
  if (step % cfg.period == 0 && !state.past_aux_grads.empty()) {
    double acc = 0.0;
    for (const Vector& past : state.past_aux_grads) acc += main_grads.grad_shared.dot(past);
    state.w_aux = std::max(0.0, state.w_aux + cfg.weight_lr * learning_rate * acc);
  }
  state.past_aux_grads.push_back(aux_grads.grad_shared);
  while (static_cast<long>(state.past_aux_grads.size()) > cfg.period)
    state.past_aux_grads.pop_front();

  const double w_main = total / 2.0;
  StaticStepResult out;
  out.state = WeightState{w_main, state.w_aux, total, 0.0, step};
  out.combined_shared =
      combine_shared(w_main, main_grads.grad_shared, state.w_aux, &aux_grads.grad_shared);
  return out;
}

namespace {

// Norm of the gradient slice owned by the last shared layer.
double last_shared_layer_norm(const MultiTaskNet& net, const Vector& shared_grad) {
  const auto layout = net.encoder().param_layout();
  const auto [offset, count] = layout.back();
  return l2_norm(shared_grad.segment(offset, count));
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

StaticStepResult gradnorm_step(GradnormState& state, const MultiTaskNet& net,
                               const GradientBundle& main_grads, const GradientBundle& aux_grads,
                               double loss_main, double loss_aux, const GradnormConfig& cfg,
                               double total, long step) {
  if (!state.initial_losses)
    state.initial_losses = {std::max(loss_main, cfg.loss_floor), std::max(loss_aux, cfg.loss_floor)};

  const double norm_m = last_shared_layer_norm(net, main_grads.grad_shared);
  const double norm_a = last_shared_layer_norm(net, aux_grads.grad_shared);

  const double g_m = state.w_main * norm_m;
  const double g_a = state.w_aux * norm_a;
  const double g_mean = 0.5 * (g_m + g_a);

  const double tr_m = loss_main / state.initial_losses->first;   // inverse training rate
  const double tr_a = loss_aux / state.initial_losses->second;
  const double tr_mean = 0.5 * (tr_m + tr_a);
  const double r_m = tr_mean > 0.0 ? tr_m / tr_mean : 1.0;
  const double r_a = tr_mean > 0.0 ? tr_a / tr_mean : 1.0;

  const double target_m = g_mean * std::pow(r_m, cfg.alpha);
  const double target_a = g_mean * std::pow(r_a, cfg.alpha);

  // L1 restoring step on the weights, then renormalize to the budget.
  state.w_main -= cfg.weight_lr * norm_m * sign_of(g_m - target_m);
  state.w_aux -= cfg.weight_lr * norm_a * sign_of(g_a - target_a);
  state.w_main = std::max(state.w_main, cfg.loss_floor);
  state.w_aux = std::max(state.w_aux, cfg.loss_floor);
  const double scale = total / (state.w_main + state.w_aux);
  state.w_main *= scale;
  state.w_aux *= scale;

  StaticStepResult out;
  out.state = WeightState{state.w_main, state.w_aux, total, 0.0, step};
  out.combined_shared = combine_shared(state.w_main, main_grads.grad_shared, state.w_aux,
                                       &aux_grads.grad_shared);
  return out;
}

const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::hydalearn: return "hydalearn";
    case StrategyKind::stl: return "stl";
    case StrategyKind::static_weights: return "static";
    case StrategyKind::gcosim: return "gcosim";
    case StrategyKind::olaux: return "olaux";
    case StrategyKind::gradnorm: return "gradnorm";
  }
  return "static";
}

StrategyKind strategy_from_string(const std::string& s) {
  if (s == "hydalearn") return StrategyKind::hydalearn;
  if (s == "stl") return StrategyKind::stl;
  if (s == "static") return StrategyKind::static_weights;
  if (s == "gcosim") return StrategyKind::gcosim;
  if (s == "olaux") return StrategyKind::olaux;
  if (s == "gradnorm") return StrategyKind::gradnorm;
  throw ConfigError("unknown strategy: " + s);
}

HydaLearnWeighter::HydaLearnWeighter(HydaConfig cfg, MetricFn metric_fn, double orientation_sign,
                                     double total, double learning_rate, double initial_mu)
    : cfg_(std::move(cfg)),
      metric_fn_(std::move(metric_fn)),
      orientation_sign_(orientation_sign),
      learning_rate_(learning_rate) {
  state_.total = total;
  state_.w_main = total / 2.0;
  state_.w_aux = total / 2.0;
  state_.mu = initial_mu;
  state_.step = 0;
}

WeighterStep HydaLearnWeighter::step(MultiTaskNet& net, const GradientBundle& main_grads,
                                     const GradientBundle* aux_grads, double, double,
                                     long step_index) {
  if (!aux_grads) throw ContractError("hydalearn: aux gradients required");
  state_.step = step_index - 1;
  HydaStepResult r = hydalearn_step(net, main_grads, *aux_grads, metric_fn_, orientation_sign_,
                                    state_, cfg_, learning_rate_);
  state_ = r.state;
  WeighterStep out;
  out.state = r.state;
  out.deltas = r.deltas;
  out.total_effective = r.total_effective;
  out.combined_shared = std::move(r.combined_shared);
  return out;
}

namespace {

class StlWeighter final : public TaskWeighter {
 public:
  explicit StlWeighter(double total) : total_(total) {}
  bool trains_aux_head() const override { return false; }
  bool needs_aux_gradients() const override { return false; }
  WeighterStep step(MultiTaskNet&, const GradientBundle& main_grads, const GradientBundle*,
                    double, double, long step_index) override {
    auto r = stl_step(main_grads, total_, step_index);
    return {r.state, std::nullopt, total_, std::move(r.combined_shared)};
  }

 private:
  double total_;
};

class StaticWeighter final : public TaskWeighter {
 public:
  StaticWeighter(double ratio, double total) : ratio_(ratio), total_(total) {}
  WeighterStep step(MultiTaskNet&, const GradientBundle& main_grads,
                    const GradientBundle* aux_grads, double, double, long step_index) override {
    if (!aux_grads) throw ContractError("static: aux gradients required");
    auto r = static_step(main_grads, *aux_grads, ratio_, total_, step_index);
    return {r.state, std::nullopt, total_, std::move(r.combined_shared)};
  }

 private:
  double ratio_;
  double total_;
};

class GcosimWeighter final : public TaskWeighter {
 public:
  WeighterStep step(MultiTaskNet&, const GradientBundle& main_grads,
                    const GradientBundle* aux_grads, double, double, long step_index) override {
    if (!aux_grads) throw ContractError("gcosim: aux gradients required");
    auto r = gcosim_step(main_grads, *aux_grads, step_index);
    return {r.state, std::nullopt, r.state.total, std::move(r.combined_shared)};
  }
};

class OlauxWeighter final : public TaskWeighter {
 public:
  OlauxWeighter(OlauxConfig cfg, double total, double learning_rate)
      : cfg_(cfg), total_(total), learning_rate_(learning_rate) {
    state_.w_aux = total / 2.0;
  }
  WeighterStep step(MultiTaskNet&, const GradientBundle& main_grads,
                    const GradientBundle* aux_grads, double, double, long step_index) override {
    if (!aux_grads) throw ContractError("olaux: aux gradients required");
    auto r = olaux_step(state_, main_grads, *aux_grads, cfg_, learning_rate_, total_, step_index);
    return {r.state, std::nullopt, total_, std::move(r.combined_shared)};
  }

 private:
  OlauxConfig cfg_;
  double total_;
  double learning_rate_;
  OlauxState state_;
};

class GradnormWeighter final : public TaskWeighter {
 public:
  GradnormWeighter(GradnormConfig cfg, double total) : cfg_(cfg), total_(total) {
    state_.w_main = total / 2.0;
    state_.w_aux = total / 2.0;
  }
  WeighterStep step(MultiTaskNet& net, const GradientBundle& main_grads,
                    const GradientBundle* aux_grads, double loss_main, double loss_aux,
                    long step_index) override {
    if (!aux_grads) throw ContractError("gradnorm: aux gradients required");
    auto r = gradnorm_step(state_, net, main_grads, *aux_grads, loss_main, loss_aux, cfg_, total_,
                           step_index);
    return {r.state, std::nullopt, total_, std::move(r.combined_shared)};
  }

 private:
  GradnormConfig cfg_;
  double total_;
  GradnormState state_;
};

}  // namespace

std::unique_ptr<TaskWeighter> make_weighter(const StrategyConfig& cfg, double total,
                                            double learning_rate, const MetricFn& metric_fn,
                                            double orientation_sign, double initial_mu) {
  switch (cfg.kind) {
    case StrategyKind::hydalearn:
      return std::make_unique<HydaLearnWeighter>(cfg.hyda, metric_fn, orientation_sign, total,
                                                 learning_rate, initial_mu);
    case StrategyKind::stl: return std::make_unique<StlWeighter>(total);
    case StrategyKind::static_weights:
      return std::make_unique<StaticWeighter>(cfg.static_ratio, total);
    case StrategyKind::gcosim: return std::make_unique<GcosimWeighter>();
    case StrategyKind::olaux: return std::make_unique<OlauxWeighter>(cfg.olaux, total, learning_rate);
    case StrategyKind::gradnorm: return std::make_unique<GradnormWeighter>(cfg.gradnorm, total);
  }
  throw ConfigError("make_weighter: unknown strategy");
}

}  // namespace hyda
