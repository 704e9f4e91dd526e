#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fallcascade/cascade/cascade.hpp"
#include "fallcascade/cascade/config.hpp"
#include "fallcascade/cleaning/confident_learning.hpp"

namespace fallcascade::cascade {

// Blank-frame removal, primary-subject selection and normalization.
data::Dataset preprocess_frames(const std::vector<data::SkeletonFrame>& frames, const data::BlankFrameRule& rule,
                                const data::ActivityCatalog& catalog);

// Reads keypoint CSVs (preprocessed) or a processed dataset CSV, detected
// from the header.
data::Dataset load_samples(const std::filesystem::path& path, const data::BlankFrameRule& rule,
                           const data::ActivityCatalog& catalog);

// Raw inputs, else the dataset file, else synthetic data.
data::Dataset load_pipeline_data(const PipelineConfig& cfg);

struct PipelineOptions {
  std::filesystem::path out_dir;  // nothing is written when empty
  std::ostream* log = nullptr;
};

struct PipelineResult {
  CascadeModel model;
  Evaluation evaluation;
  BinaryMap qbin;
  data::Dataset test;
  std::size_t samples = 0;
  std::size_t flagged = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t multiclass_size = 0;
};

// load -> preprocess -> clean -> split -> train_bfc -> binary_map -> derive ->
// train_mfec -> evaluate. Library errors are re-thrown tagged with the stage.
PipelineResult run_full_pipeline(const PipelineConfig& cfg, const PipelineOptions& options = {});

}  // namespace fallcascade::cascade
