#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fallcascade/cleaning/confident_learning.hpp"
#include "fallcascade/data/preprocess.hpp"
#include "fallcascade/data/skeleton.hpp"
#include "fallcascade/data/split.hpp"
#include "fallcascade/data/synth.hpp"
#include "fallcascade/net/network.hpp"

namespace fallcascade::cascade {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_bfc = 1024;
  int batch_mfec = 32;
  int epochs_bfc = 300;
  int epochs_mfec = 600;
  net::HeadWeights head_weights = net::kDefaultHeadWeights;  // normalized to sum 1
  double m = 0.03;  // band below 0.5
  double n = 0.02;  // band above 0.5
  std::uint64_t seed = 7;
  // Share of the training data held out for the per-epoch log.
  double validation_fraction = 0.1;

  void validate() const;
};

struct CleaningConfig {
  bool enabled = true;
  int folds = 5;
  cleaning::NetFoldTrainerOptions trainer;
};

// Data comes from keypoint CSVs (`inputs`), else a processed dataset CSV
// (`dataset`), else the synthetic generator.
struct PipelineConfig {
  TrainConfig train;
  std::vector<std::string> inputs;
  std::string dataset;
  data::SynthConfig synth = data::SynthConfig::defaults();
  data::BlankFrameRule blank_frames;
  data::SplitSpec split;
  CleaningConfig cleaning;
  data::ActivityCatalog activities = data::ActivityCatalog::up_fall();

  void validate() const;
};

// Flat TrainConfig keys at top level plus `inputs`, `dataset`, `synth`,
// `blank_frames`, `split`, `cleaning` and `activities`. Unknown keys are
// rejected; missing keys keep their defaults.
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const PipelineConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

// Short training profile: a tenth of the epochs at ten times the learning rate.
inline constexpr int kFastEpochsBfc = 30;
inline constexpr int kFastEpochsMfec = 60;
inline constexpr double kFastLearningRate = 1e-3;

}  // namespace fallcascade::cascade
