#include "hyda/config_json.hpp"

namespace hyda {

using nlohmann::json;

json to_json(const ToySpec& spec) {
  return json{{"n_train", spec.n_train},
              {"n_val", spec.n_val},
              {"n_test", spec.n_test},
              {"input_dim", spec.input_dim},
              {"output_dim", spec.output_dim},
              {"b_variance", spec.b_variance},
              {"eps_variance", spec.eps_variance},
              {"sigma_main", spec.sigma_main},
              {"sigma_aux", spec.sigma_aux},
              {"noise_std", spec.noise_std},
              {"projection_variance", spec.projection_variance},
              {"aux_mode", spec.aux_mode == AuxMode::related ? "related" : "unrelated"},
              {"seed", spec.seed}};
}

ToySpec toyspec_from_json(const json& j) {
  ToySpec s;
  s.n_train = j.value("n_train", s.n_train);
  s.n_val = j.value("n_val", s.n_val);
  s.n_test = j.value("n_test", s.n_test);
  s.input_dim = j.value("input_dim", s.input_dim);
  s.output_dim = j.value("output_dim", s.output_dim);
  s.b_variance = j.value("b_variance", s.b_variance);
  s.eps_variance = j.value("eps_variance", s.eps_variance);
  s.sigma_main = j.value("sigma_main", s.sigma_main);
  s.sigma_aux = j.value("sigma_aux", s.sigma_aux);
  s.noise_std = j.value("noise_std", s.noise_std);
  s.projection_variance = j.value("projection_variance", s.projection_variance);
  if (j.contains("aux_mode")) {
    const std::string m = j["aux_mode"].get<std::string>();
    if (m == "related")
      s.aux_mode = AuxMode::related;
    else if (m == "unrelated")
      s.aux_mode = AuxMode::unrelated;
    else
      throw ConfigError("toyspec: unknown aux_mode: " + m);
  }
  s.seed = j.value("seed", s.seed);
  return s;
}

json to_json(const StrategyConfig& cfg) {
  json j{{"kind", to_string(cfg.kind)}};
  switch (cfg.kind) {
    case StrategyKind::hydalearn:
      j["beta"] = cfg.hyda.beta;
      j["normalize_fake_grads"] = cfg.hyda.normalize_fake_grads;
      j["metric_dataset"] =
          cfg.hyda.metric_dataset == MetricSet::validation ? "validation" : "training";
      j["downscale_total"] = cfg.hyda.downscale_total;
      j["delta_floor"] = cfg.hyda.delta_floor;
      j["literal_delta_sign"] = cfg.hyda.literal_delta_sign;
      j["metric_subsample"] = cfg.hyda.metric_subsample;
      j["literal_anchor"] = cfg.hyda.literal_anchor;
      break;
    case StrategyKind::static_weights: j["ratio"] = cfg.static_ratio; break;
    case StrategyKind::olaux:
      j["period"] = cfg.olaux.period;
      j["weight_lr"] = cfg.olaux.weight_lr;
      break;
    case StrategyKind::gradnorm:
      j["alpha"] = cfg.gradnorm.alpha;
      j["weight_lr"] = cfg.gradnorm.weight_lr;
      break;
    case StrategyKind::stl:
    case StrategyKind::gcosim: break;
  }
  return j;
}

StrategyConfig strategy_from_json(const json& j) {
  StrategyConfig cfg;
  cfg.kind = strategy_from_string(j.at("kind").get<std::string>());
  switch (cfg.kind) {
    case StrategyKind::hydalearn: {
      cfg.hyda.beta = j.value("beta", cfg.hyda.beta);
      cfg.hyda.normalize_fake_grads = j.value("normalize_fake_grads", cfg.hyda.normalize_fake_grads);
      if (j.contains("metric_dataset")) {
        const std::string m = j["metric_dataset"].get<std::string>();
        if (m == "validation")
          cfg.hyda.metric_dataset = MetricSet::validation;
        else if (m == "training")
          cfg.hyda.metric_dataset = MetricSet::training;
        else
          throw ConfigError("strategy: unknown metric_dataset: " + m);
      }
      cfg.hyda.downscale_total = j.value("downscale_total", cfg.hyda.downscale_total);
      cfg.hyda.delta_floor = j.value("delta_floor", cfg.hyda.delta_floor);
      cfg.hyda.literal_delta_sign = j.value("literal_delta_sign", cfg.hyda.literal_delta_sign);
      cfg.hyda.metric_subsample = j.value("metric_subsample", cfg.hyda.metric_subsample);
      cfg.hyda.literal_anchor = j.value("literal_anchor", cfg.hyda.literal_anchor);
      break;
    }
    case StrategyKind::static_weights: cfg.static_ratio = j.value("ratio", cfg.static_ratio); break;
    case StrategyKind::olaux:
      cfg.olaux.period = j.value("period", cfg.olaux.period);
      cfg.olaux.weight_lr = j.value("weight_lr", cfg.olaux.weight_lr);
      break;
    case StrategyKind::gradnorm:
      cfg.gradnorm.alpha = j.value("alpha", cfg.gradnorm.alpha);
      cfg.gradnorm.weight_lr = j.value("weight_lr", cfg.gradnorm.weight_lr);
      break;
    case StrategyKind::stl:
    case StrategyKind::gcosim: break;
  }
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  return json{{"learning_rate", cfg.learning_rate},
              {"total_weight", cfg.total_weight},
              {"max_steps", cfg.max_steps},
              {"max_epochs", cfg.max_epochs},
              {"eval_every", cfg.eval_every},
              {"patience", cfg.patience},
              {"batch_size", cfg.batch_size},
              {"seed", cfg.seed},
              {"strategy", to_json(cfg.strategy)},
              {"metric", to_string(cfg.metric)},
              {"aux_head_literal_base", cfg.aux_head_literal_base}};
}

TrainConfig trainconfig_from_json(const json& j) {
  TrainConfig cfg;
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.total_weight = j.value("total_weight", cfg.total_weight);
  cfg.max_steps = j.value("max_steps", cfg.max_steps);
  cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
  cfg.eval_every = j.value("eval_every", cfg.eval_every);
  cfg.patience = j.value("patience", cfg.patience);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("strategy")) cfg.strategy = strategy_from_json(j["strategy"]);
  if (j.contains("metric")) cfg.metric = metric_kind_from_string(j["metric"].get<std::string>());
  cfg.aux_head_literal_base = j.value("aux_head_literal_base", cfg.aux_head_literal_base);
  return cfg;
}

json to_json(const Architecture& arch) {
  return json{{"encoder_hidden", arch.encoder_hidden},
              {"head_hidden", arch.head_hidden},
              {"hidden_activation", to_string(arch.hidden_activation)},
              {"output_activation_main", to_string(arch.output_activation_main)},
              {"output_activation_aux", to_string(arch.output_activation_aux)}};
}

Architecture architecture_from_json(const json& j) {
  Architecture arch;
  if (j.contains("encoder_hidden")) arch.encoder_hidden = j["encoder_hidden"].get<std::vector<Index>>();
  arch.head_hidden = j.value("head_hidden", arch.head_hidden);
  if (j.contains("hidden_activation"))
    arch.hidden_activation = activation_from_string(j["hidden_activation"].get<std::string>());
  if (j.contains("output_activation_main"))
    arch.output_activation_main =
        activation_from_string(j["output_activation_main"].get<std::string>());
  if (j.contains("output_activation_aux"))
    arch.output_activation_aux =
        activation_from_string(j["output_activation_aux"].get<std::string>());
  return arch;
}

json to_json(const ExperimentSpec& spec) {
  json strategies = json::array();
  for (auto s : spec.strategies) strategies.push_back(to_string(s));
  return json{{"name", spec.name},
              {"data", to_json(spec.data)},
              {"architecture", to_json(spec.arch)},
              {"strategies", strategies},
              {"seeds", spec.seeds},
              {"train", to_json(spec.train)},
              {"jobs", spec.jobs}};
}

ExperimentSpec experiment_from_json(const json& j) {
  ExperimentSpec spec;
  spec.name = j.value("name", spec.name);
  if (j.contains("data")) spec.data = toyspec_from_json(j["data"]);
  if (j.contains("architecture")) spec.arch = architecture_from_json(j["architecture"]);
  if (j.contains("strategies")) {
    spec.strategies.clear();
    for (const auto& s : j["strategies"]) spec.strategies.push_back(strategy_from_string(s));
  }
  if (j.contains("seeds")) spec.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("train")) spec.train = trainconfig_from_json(j["train"]);
  spec.jobs = j.value("jobs", spec.jobs);
  return spec;
}

json summary_to_json(const RunSummary& s, const std::string& strategy, std::uint64_t seed) {
  return json{{"strategy", strategy},
              {"seed", seed},
              {"test_metric_main", s.test_metric_main},
              {"best_val", s.best_val},
              {"best_step", s.best_step},
              {"stopped_step", s.stopped_step},
              {"dataset_checksum", s.dataset_checksum},
              {"init_param_checksum", s.init_param_checksum},
              {"final_param_checksum", s.final_param_checksum}};
}

}  // namespace hyda
