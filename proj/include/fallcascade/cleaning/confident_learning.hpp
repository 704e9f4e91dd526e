#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fallcascade/data/skeleton.hpp"
#include "fallcascade/net/layer.hpp"

namespace fallcascade::cleaning {

// Trains on (train_x, train_y) and returns class probabilities for every row
// of predict_x. `fold` is 0-based and lets the trainer vary its seed.
using FoldTrainer = std::function<net::Matrix(const net::Matrix& train_x, std::span<const int> train_y,
                                              const net::Matrix& predict_x, int class_count, int fold)>;

// Round-robin over each class after a seeded shuffle. Throws DataError when a
// class has fewer than two samples (it would vanish from some training fold).
std::vector<int> stratified_folds(std::span<const int> labels, int class_count, int folds, std::uint64_t seed);

// Out-of-fold probabilities [N x class_count].
net::Matrix crossval_probs(const net::Matrix& features, std::span<const int> labels, int class_count, int folds,
                           const FoldTrainer& trainer, std::uint64_t seed);

// t_j = mean of probs(:, j) over the samples labelled j.
std::vector<double> class_thresholds(const net::Matrix& probs, std::span<const int> labels);

struct CleaningRow {
  std::size_t index = 0;
  int given = 0;
  int predicted = 0;
  double prob = 0.0;
  bool flagged = false;
};

struct CleaningReport {
  static constexpr const char* kRule =
      "flag sample when argmax class k != given label and p(k) >= t_k, where t_k is the mean out-of-fold "
      "probability of class k over samples labelled k";

  std::vector<CleaningRow> rows;
  std::vector<double> thresholds;
  std::vector<std::vector<std::int64_t>> flagged_pairs;  // [given][predicted]

  std::size_t flagged_count() const;
  std::vector<std::size_t> flagged_indices() const;
};

// Argmax ties go to the lowest class index.
CleaningReport flag_mislabeled(const net::Matrix& probs, std::span<const int> labels,
                               std::span<const double> thresholds);

// Removes flagged samples, keeping order. `warnings` receives a note when
// nothing survives.
data::Dataset clean(const data::Dataset& samples, const CleaningReport& report,
                    std::vector<std::string>* warnings = nullptr);

struct NetFoldTrainerOptions {
  int hidden_width = 32;
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;
  std::uint64_t seed = 7;
};

// Small net: two hidden dense layers with batchnorm and ReLU, softmax heads.
FoldTrainer net_fold_trainer(const NetFoldTrainerOptions& options);

struct CleaningOptions {
  int folds = 5;
  std::uint64_t seed = 7;
  NetFoldTrainerOptions trainer;
};

// Runs the whole procedure on activity labels.
CleaningReport confident_learning(const data::Dataset& samples, const data::ActivityCatalog& catalog,
                                  const CleaningOptions& options);

// index,given,predicted,prob,flagged
void write_cleaning_csv(std::ostream& out, const CleaningReport& report, const std::vector<std::string>& labels);
nlohmann::json cleaning_summary(const CleaningReport& report, const std::vector<std::string>& labels);
void write_cleaning_report(const CleaningReport& report, const std::vector<std::string>& labels,
                           const std::filesystem::path& csv_path, const std::filesystem::path& json_path);

}  // namespace fallcascade::cleaning
