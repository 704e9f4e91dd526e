#include "fallcascade/cascade/cascade.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "fallcascade/data/split.hpp"
#include "fallcascade/error.hpp"
#include "fallcascade/net/model_io.hpp"
#include "fallcascade/net/trainer.hpp"
#include "fallcascade/text.hpp"

namespace fallcascade::cascade {

namespace {

constexpr int kFormatVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Stratified slice for the training log; empty when the data is too small.
Holdout holdout(std::span<const int> labels, double fraction, std::uint64_t seed) {
  Holdout h;
  if (fraction > 0.0) {
    try {
      auto idx = data::stratified_split_indices(labels, 1.0 - fraction, seed);
      h.train = std::move(idx.train);
      h.validation = std::move(idx.test);
      return h;
    } catch (const ConfigError&) {
      h.validation.clear();
    }
  }
  h.train.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) h.train[i] = i;
  return h;
}

std::vector<int> pick(std::span<const int> v, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

int argmax_row(const net::Matrix& m, Eigen::Index r) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(r, c) > m(r, best)) best = c;
  }
  return static_cast<int>(best);
}

std::vector<int> argmax_rows(const net::Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax_row(m, r);
  return out;
}

TrainedNetwork train_network(const data::Dataset& samples, std::span<const int> labels, int class_count,
                             int epochs, int batch, std::uint64_t seed, const TrainConfig& cfg) {
  const auto features = data::feature_matrix(samples);
  const auto split = holdout(labels, cfg.validation_fraction, seed);
  const auto train_x = net::gather_rows(features, split.train);
  const auto train_y = pick(labels, split.train);
  const auto val_x = net::gather_rows(features, split.validation);
  const auto val_y = pick(labels, split.validation);

  TrainedNetwork out{net::build_network(data::kFeatureWidth, class_count, net::default_architecture(class_count), seed), {}};
  net::TrainOptions options;
  options.epochs = epochs;
  options.batch_size = batch;
  options.learning_rate = cfg.learning_rate;
  options.head_weights = cfg.head_weights;
  options.seed = seed;
  const auto on_epoch = [&](const net::EpochStats& stats, net::Network& model) {
    EpochLog row{stats.epoch, stats.mean_loss, kNaN, kNaN};
    if (!val_y.empty()) {
      const auto head = model.predict(val_x).heads[net::kHeadCount - 1];
      std::vector<int> pred;
      if (class_count == 1) {
        for (Eigen::Index r = 0; r < head.rows(); ++r) pred.push_back(head(r, 0) >= 0.5 ? 1 : 0);
      } else {
        pred = argmax_rows(head);
      }
      const auto classes = static_cast<std::size_t>(std::max(class_count, 2));
      std::vector<std::string> names(classes);
      const auto r = metrics::report(metrics::confusion(val_y, pred, classes), names);
      row.accuracy = r.accuracy;
      row.score = class_count == 1 ? r.classes[1].recall : r.macro_f1;
    }
    out.log.push_back(row);
  };
  net::train_minibatch(out.net, train_x, train_y,
                       class_count == 1 ? net::LossKind::binary : net::LossKind::sparse_categorical, options, on_epoch);
  return out;
}

}  // namespace

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::fall: return "fall";
    case Decision::uncertain: return "uncertain";
    case Decision::no_fall: break;
  }
  return "no_fall";
}

Decision decision_from_string(std::string_view name) {
  if (name == "fall") return Decision::fall;
  if (name == "uncertain") return Decision::uncertain;
  if (name == "no_fall") return Decision::no_fall;
  throw DataError("unknown decision '" + std::string(name) + "'");
}

Decision decide(double p, double m, double n) {
  if (p >= 0.5 + n) return Decision::fall;
  if (p <= 0.5 - m) return Decision::no_fall;
  return Decision::uncertain;
}

std::vector<double> fall_probabilities(const net::Network& bfc, const net::Matrix& features) {
  if (bfc.class_count() != 1) throw ConfigError("BFC network must have a single sigmoid output");
  const auto head = bfc.predict(features).heads[net::kHeadCount - 1];
  return std::vector<double>(head.data(), head.data() + head.rows());
}

BinaryMap build_binary_map(const net::Network& bfc, const data::Dataset& samples, double m, double n) {
  BinaryMap map;
  if (samples.empty()) return map;
  const auto p = fall_probabilities(bfc, data::feature_matrix(samples));
  map.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) map.push_back({samples[i].provenance.key(), p[i], decide(p[i], m, n)});
  return map;
}

void write_binary_map(std::ostream& out, const BinaryMap& map) {
  out << "key,p,decision\n";
  for (const auto& e : map) out << e.key << ',' << text::format_double(e.p) << ',' << to_string(e.decision) << '\n';
}

void write_binary_map(const std::filesystem::path& path, const BinaryMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_binary_map(out, map);
}

MulticlassSet derive_multiclass_set(const data::Dataset& samples, const BinaryMap& map) {
  if (map.size() != samples.size()) throw InternalError("binary map and dataset differ in length");
  MulticlassSet out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (map[i].decision == Decision::no_fall || !samples[i].multi_label) continue;
    out.samples.push_back(samples[i]);
    out.labels.push_back(*samples[i].multi_label);
    out.source.push_back(i);
  }
  if (out.samples.empty()) {
    throw PipelineError("no ground-truth fall sample reached the multi-class stage; check that the data contains "
                        "falls or loosen the thresholds m and n");
  }
  return out;
}

TrainedNetwork train_bfc(const data::Dataset& samples, const TrainConfig& cfg) {
  cfg.validate();
  const auto labels = data::binary_labels(samples);
  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw TrainingError("BFC training data must contain both fall and no-fall samples");
  return train_network(samples, labels, 1, cfg.epochs_bfc, cfg.batch_bfc, cfg.seed, cfg);
}

TrainedNetwork train_mfec(const data::Dataset& samples, const TrainConfig& cfg) {
  cfg.validate();
  const auto labels = data::fall_labels(samples);
  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() != static_cast<std::size_t>(data::kFallClassCount)) {
    std::string missing;
    for (int c = 0; c < data::kFallClassCount; ++c) {
      if (!present.count(c)) missing += (missing.empty() ? "" : ", ") + std::string(data::kFallClassNames[static_cast<std::size_t>(c)]);
    }
    throw TrainingError("MFEC training data lacks fall classes: " + missing);
  }
  return train_network(samples, labels, data::kFallClassCount, cfg.epochs_mfec, cfg.batch_mfec, cfg.seed + 1, cfg);
}

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log,
                        std::string_view score_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "epoch,loss,accuracy," << score_name << '\n';
  for (const auto& r : log) {
    out << r.epoch << ',' << text::format_double(r.loss) << ',' << text::format_double(r.accuracy) << ','
        << text::format_double(r.score) << '\n';
  }
}

std::vector<Prediction> CascadeModel::predict_batch(const net::Matrix& features, InferenceCounters* counters) const {
  const auto p = fall_probabilities(bfc, features);
  std::vector<Prediction> out(p.size());
  std::vector<std::size_t> routed;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i].p = p[i];
    out[i].decision = decide(p[i], config.m, config.n);
    if (out[i].decision != Decision::no_fall) routed.push_back(i);
  }
  if (routed.empty()) return out;
  if (counters) {
    counters->mfec_calls.fetch_add(1, std::memory_order_relaxed);
    counters->mfec_rows.fetch_add(static_cast<std::int64_t>(routed.size()), std::memory_order_relaxed);
  }
  const auto head = mfec.predict(net::gather_rows(features, routed)).heads[net::kHeadCount - 1];
  for (std::size_t r = 0; r < routed.size(); ++r) out[routed[r]].fall_class = argmax_row(head, static_cast<Eigen::Index>(r));
  return out;
}

Prediction CascadeModel::predict(const data::FeatureVector& sample, InferenceCounters* counters) const {
  return predict_batch(data::feature_matrix({sample}), counters).front();
}

std::string CascadeModel::label_of(const Prediction& p) const {
  return p.is_fall() ? class_names.at(static_cast<std::size_t>(p.fall_class)) : kNoFallLabel;
}

Evaluation evaluate(const CascadeModel& model, const data::Dataset& test) {
  if (test.empty()) throw DataError("evaluation set is empty");
  const auto preds = model.predict_batch(data::feature_matrix(test));
  std::vector<int> bin_truth, bin_pred, fall_truth, fall_pred;
  const int missed = static_cast<int>(model.class_names.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    bin_truth.push_back(test[i].binary_label);
    bin_pred.push_back(preds[i].is_fall() ? 1 : 0);
    if (test[i].multi_label) {
      fall_truth.push_back(*test[i].multi_label);
      fall_pred.push_back(preds[i].is_fall() ? preds[i].fall_class : missed);
    }
  }
  auto labels = model.class_names;
  labels.push_back(kNoFallLabel);
  return {metrics::report(metrics::confusion(bin_truth, bin_pred, 2), {kNoFallLabel, "fall"}),
          metrics::report(metrics::confusion(fall_truth, fall_pred, labels.size()), labels)};
}

void write_evaluation(const Evaluation& e, const std::filesystem::path& dir) {
  metrics::write_report(e.binary, dir / "report_binary.csv", dir / "report_binary.json");
  metrics::write_report(e.falls, dir / "report_falls.csv", dir / "report_falls.json");
}

void save_cascade(const CascadeModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  net::save_model(model.bfc, dir / "bfc.json");
  net::save_model(model.mfec, dir / "mfec.json");
  const nlohmann::json doc{{"format_version", kFormatVersion},
                           {"m", model.config.m},
                           {"n", model.config.n},
                           {"class_names", model.class_names},
                           {"config", to_json(model.config)}};
  std::ofstream out(dir / "cascade.json", std::ios::binary);
  if (!out) throw DataError("cannot write '" + (dir / "cascade.json").string() + "'");
  out << doc.dump(2) << '\n';
}

CascadeModel load_cascade(const std::filesystem::path& dir) {
  const auto path = dir / "cascade.json";
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) throw LoadError(path.string() + ": missing format_version");
  if (doc["format_version"] != kFormatVersion) {
    throw UnsupportedVersionError(path.string() + ": unsupported format_version " + doc["format_version"].dump());
  }
  CascadeModel model;
  try {
    model.config = train_config_from_json(doc.at("config"));
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(path.string() + ": config: " + e.message());
  }
  if (model.class_names.size() != static_cast<std::size_t>(data::kFallClassCount)) {
    throw LoadError(path.string() + ": class_names must list 5 fall classes");
  }
  model.bfc = net::load_model(dir / "bfc.json");
  model.mfec = net::load_model(dir / "mfec.json");
  if (model.bfc.class_count() != 1 || model.bfc.input_width() != data::kFeatureWidth) {
    throw LoadError("bfc.json: expected a 51-input binary network");
  }
  if (model.mfec.class_count() != data::kFallClassCount || model.mfec.input_width() != data::kFeatureWidth) {
    throw LoadError("mfec.json: expected a 51-input five-class network");
  }
  return model;
}

}  // namespace fallcascade::cascade
