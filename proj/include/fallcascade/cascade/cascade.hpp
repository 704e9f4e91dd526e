#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fallcascade/cascade/config.hpp"
#include "fallcascade/data/skeleton.hpp"
#include "fallcascade/metrics/classification_report.hpp"
#include "fallcascade/net/network.hpp"

namespace fallcascade::cascade {

enum class Decision { no_fall, fall, uncertain };

std::string_view to_string(Decision d);
Decision decision_from_string(std::string_view name);

// fall if p >= 0.5 + n, no_fall if p <= 0.5 - m, uncertain in between. With
// m = n = 0 this is plain p >= 0.5.
Decision decide(double p, double m, double n);

struct BinaryEntry {
  std::string key;
  double p = 0.0;
  Decision decision = Decision::no_fall;
};

using BinaryMap = std::vector<BinaryEntry>;

// Fall probability from the final sigmoid head.
std::vector<double> fall_probabilities(const net::Network& bfc, const net::Matrix& features);

BinaryMap build_binary_map(const net::Network& bfc, const data::Dataset& samples, double m, double n);

// key,p,decision
void write_binary_map(std::ostream& out, const BinaryMap& map);
void write_binary_map(const std::filesystem::path& path, const BinaryMap& map);

struct MulticlassSet {
  data::Dataset samples;
  std::vector<int> labels;            // fall class index
  std::vector<std::size_t> source;    // row in the input dataset
};

// Ground-truth falls whose decision is fall or uncertain. Throws
// PipelineError when nothing qualifies.
MulticlassSet derive_multiclass_set(const data::Dataset& samples, const BinaryMap& map);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  // On the held-out slice; NaN when the slice is empty.
  double accuracy = 0.0;
  double score = 0.0;  // fall recall (BFC) or macro F1 (MFEC)
};

struct TrainedNetwork {
  net::Network net;
  std::vector<EpochLog> log;
};

TrainedNetwork train_bfc(const data::Dataset& samples, const TrainConfig& cfg);
// Needs all five fall classes.
TrainedNetwork train_mfec(const data::Dataset& samples, const TrainConfig& cfg);

// epoch,loss,accuracy,<score_name>
void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log,
                        std::string_view score_name);

// Rows handed to the MFEC; safe to share between threads.
struct InferenceCounters {
  std::atomic<std::int64_t> mfec_rows{0};
  std::atomic<std::int64_t> mfec_calls{0};
};

struct Prediction {
  double p = 0.0;
  Decision decision = Decision::no_fall;
  int fall_class = -1;  // -1 for no_fall

  bool is_fall() const { return fall_class >= 0; }
};

struct CascadeModel {
  net::Network bfc;
  net::Network mfec;
  TrainConfig config;
  std::vector<std::string> class_names = data::fall_class_labels();

  // The no_fall decision ends at the BFC; fall and uncertain rows go to the
  // MFEC final head (ties to the lower class index).
  Prediction predict(const data::FeatureVector& sample, InferenceCounters* counters = nullptr) const;
  std::vector<Prediction> predict_batch(const net::Matrix& features, InferenceCounters* counters = nullptr) const;
  std::string label_of(const Prediction& p) const;
};

struct Evaluation {
  metrics::ClassificationReport binary;  // no_fall, fall
  // Ground-truth falls only; the extra no_fall column counts BFC misses.
  metrics::ClassificationReport falls;
};

inline constexpr const char* kNoFallLabel = "no_fall";

Evaluation evaluate(const CascadeModel& model, const data::Dataset& test);
void write_evaluation(const Evaluation& e, const std::filesystem::path& dir);

// bfc.json, mfec.json, cascade.json
void save_cascade(const CascadeModel& model, const std::filesystem::path& dir);
CascadeModel load_cascade(const std::filesystem::path& dir);

}  // namespace fallcascade::cascade
