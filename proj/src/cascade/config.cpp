#include "fallcascade/cascade/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fallcascade/error.hpp"

namespace fallcascade::cascade {

namespace {

using nlohmann::json;

const std::vector<std::string> kTrainKeys{"learning_rate", "batch_bfc", "batch_mfec", "epochs_bfc", "epochs_mfec",
                                          "head_weights",  "m",         "n",          "seed",       "validation_fraction"};

void reject_unknown(const json& j, const std::vector<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + (where.empty() || where == "config" ? key : where + "." + key) + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + (where.empty() ? std::string() : where + ".") + key + "' has the wrong type");
  }
}

void read_train(const json& j, TrainConfig& cfg) {
  read(j, "learning_rate", cfg.learning_rate, "");
  read(j, "batch_bfc", cfg.batch_bfc, "");
  read(j, "batch_mfec", cfg.batch_mfec, "");
  read(j, "epochs_bfc", cfg.epochs_bfc, "");
  read(j, "epochs_mfec", cfg.epochs_mfec, "");
  read(j, "m", cfg.m, "");
  read(j, "n", cfg.n, "");
  read(j, "seed", cfg.seed, "");
  read(j, "validation_fraction", cfg.validation_fraction, "");
  if (j.contains("head_weights")) {
    std::vector<double> w;
    read(j, "head_weights", w, "");
    if (w.size() != net::kHeadCount) throw ConfigError("head_weights needs 3 values");
    net::HeadWeights raw{w[0], w[1], w[2]};
    for (double v : raw) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("head_weights must be positive");
    }
    cfg.head_weights = net::normalize_head_weights(raw);
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
  if (batch_bfc < 2 || batch_mfec < 2) throw ConfigError("batch sizes must be at least 2");
  if (epochs_bfc < 1 || epochs_mfec < 1) throw ConfigError("epochs must be at least 1");
  if (!(m >= 0.0) || !(n >= 0.0)) throw ConfigError("thresholds m and n must be >= 0");
  if (!(m + n < 0.5)) throw ConfigError("thresholds must satisfy m + n < 0.5");
  for (double w : head_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("head_weights must be positive");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 0.5)) {
    throw ConfigError("validation_fraction must lie in [0, 0.5)");
  }
}

void PipelineConfig::validate() const {
  train.validate();
  if (inputs.empty() && dataset.empty()) synth.validate();
  blank_frames.validate();
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) throw ConfigError("split.train_fraction must lie in (0, 1)");
  if (cleaning.folds < 2) throw ConfigError("cleaning.folds must be at least 2");
  const auto& t = cleaning.trainer;
  if (t.hidden_width < 1 || t.epochs < 1 || t.batch_size < 2 || !(t.learning_rate > 0.0)) {
    throw ConfigError("cleaning trainer settings must be positive (batch_size >= 2)");
  }
  if (activities.entries().size() != static_cast<std::size_t>(data::kActivityCount)) {
    throw ConfigError("activities must list 11 activity codes");
  }
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"batch_bfc", cfg.batch_bfc},
          {"batch_mfec", cfg.batch_mfec},
          {"epochs_bfc", cfg.epochs_bfc},
          {"epochs_mfec", cfg.epochs_mfec},
          {"head_weights", cfg.head_weights},
          {"m", cfg.m},
          {"n", cfg.n},
          {"seed", cfg.seed},
          {"validation_fraction", cfg.validation_fraction}};
}

json to_json(const PipelineConfig& cfg) {
  json j = to_json(cfg.train);
  j["inputs"] = cfg.inputs;
  j["dataset"] = cfg.dataset;
  j["synth"] = cfg.synth.to_json();
  j["blank_frames"] = {{"min_keypoints", cfg.blank_frames.min_keypoints},
                       {"min_confidence", cfg.blank_frames.min_confidence}};
  j["split"] = {{"train_fraction", cfg.split.train_fraction},
                {"strategy", std::string(data::to_string(cfg.split.strategy))},
                {"seed", cfg.split.seed}};
  const auto& t = cfg.cleaning.trainer;
  j["cleaning"] = {{"enabled", cfg.cleaning.enabled},
                   {"folds", cfg.cleaning.folds},
                   {"hidden_width", t.hidden_width},
                   {"epochs", t.epochs},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"seed", t.seed}};
  j["activities"] = cfg.activities.to_json();
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown(j, kTrainKeys, "config");
  TrainConfig cfg;
  read_train(j, cfg);
  cfg.validate();
  return cfg;
}

PipelineConfig pipeline_config_from_json(const json& j) {
  auto known = kTrainKeys;
  known.insert(known.end(), {"inputs", "dataset", "synth", "blank_frames", "split", "cleaning", "activities"});
  reject_unknown(j, known, "config");
  PipelineConfig cfg;
  read_train(j, cfg.train);
  read(j, "inputs", cfg.inputs, "");
  read(j, "dataset", cfg.dataset, "");
  if (j.contains("activities")) cfg.activities = data::ActivityCatalog::from_json(j.at("activities"));
  // Component seeds follow the top-level seed unless given explicitly.
  cfg.synth = data::SynthConfig::defaults(cfg.activities);
  if (j.contains("synth")) cfg.synth = data::SynthConfig::from_json(j.at("synth"), cfg.activities);
  if (!j.contains("synth") || !j.at("synth").contains("seed")) cfg.synth.seed = cfg.train.seed;
  cfg.cleaning.trainer.seed = cfg.train.seed;
  if (j.contains("blank_frames")) {
    const auto& b = j.at("blank_frames");
    reject_unknown(b, {"min_keypoints", "min_confidence"}, "blank_frames");
    read(b, "min_keypoints", cfg.blank_frames.min_keypoints, "blank_frames");
    read(b, "min_confidence", cfg.blank_frames.min_confidence, "blank_frames");
  }
  cfg.split.seed = cfg.train.seed;
  if (j.contains("split")) {
    const auto& s = j.at("split");
    reject_unknown(s, {"train_fraction", "strategy", "seed"}, "split");
    read(s, "train_fraction", cfg.split.train_fraction, "split");
    read(s, "seed", cfg.split.seed, "split");
    if (s.contains("strategy")) {
      std::string name;
      read(s, "strategy", name, "split");
      cfg.split.strategy = data::split_strategy_from_string(name);
    }
  }
  if (j.contains("cleaning")) {
    const auto& c = j.at("cleaning");
    reject_unknown(c, {"enabled", "folds", "hidden_width", "epochs", "batch_size", "learning_rate", "seed"}, "cleaning");
    read(c, "enabled", cfg.cleaning.enabled, "cleaning");
    read(c, "folds", cfg.cleaning.folds, "cleaning");
    read(c, "hidden_width", cfg.cleaning.trainer.hidden_width, "cleaning");
    read(c, "epochs", cfg.cleaning.trainer.epochs, "cleaning");
    read(c, "batch_size", cfg.cleaning.trainer.batch_size, "cleaning");
    read(c, "learning_rate", cfg.cleaning.trainer.learning_rate, "cleaning");
    read(c, "seed", cfg.cleaning.trainer.seed, "cleaning");
  }
  cfg.validate();
  return cfg;
}

}  // namespace fallcascade::cascade
