#include "fallcascade/cleaning/confident_learning.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>

#include "fallcascade/error.hpp"
#include "fallcascade/net/network.hpp"
#include "fallcascade/net/trainer.hpp"
#include "fallcascade/text.hpp"

namespace fallcascade::cleaning {

namespace {

void check_labels(std::span<const int> labels, int class_count) {
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw DataError("label " + std::to_string(y) + " outside 0.." + std::to_string(class_count - 1));
  }
}

}  // namespace

std::vector<int> stratified_folds(std::span<const int> labels, int class_count, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("confident learning needs at least 2 folds, got " + std::to_string(folds));
  check_labels(labels, class_count);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(i);
  for (int c = 0; c < class_count; ++c) {
    const auto count = members[static_cast<std::size_t>(c)].size();
    if (count < 2) {
      throw DataError("stratification error: class " + std::to_string(c) + " has " + std::to_string(count) +
                      " sample(s) and would be absent from a training fold");
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t i : group) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

net::Matrix crossval_probs(const net::Matrix& features, std::span<const int> labels, int class_count, int folds,
                           const FoldTrainer& trainer, std::uint64_t seed) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw DataError("features and labels differ in length");
  const auto fold = stratified_folds(labels, class_count, folds, seed);
  net::Matrix probs(features.rows(), class_count);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, held_rows;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (fold[i] == f) {
        held_rows.push_back(i);
      } else {
        train_rows.push_back(i);
        train_y.push_back(labels[i]);
      }
    }
    if (held_rows.empty()) continue;
    const net::Matrix out = trainer(net::gather_rows(features, train_rows), train_y, net::gather_rows(features, held_rows),
                                    class_count, f);
    if (out.rows() != static_cast<Eigen::Index>(held_rows.size()) || out.cols() != class_count) {
      throw InternalError("fold trainer returned a probability matrix of the wrong shape");
    }
    for (std::size_t r = 0; r < held_rows.size(); ++r) {
      probs.row(static_cast<Eigen::Index>(held_rows[r])) = out.row(static_cast<Eigen::Index>(r));
    }
  }
  return probs;
}

std::vector<double> class_thresholds(const net::Matrix& probs, std::span<const int> labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) throw DataError("probabilities and labels differ in length");
  const auto classes = static_cast<int>(probs.cols());
  check_labels(labels, classes);
  std::vector<double> sum(static_cast<std::size_t>(classes), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(classes), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    sum[c] += probs(static_cast<Eigen::Index>(i), labels[i]);
    ++count[c];
  }
  for (std::size_t c = 0; c < sum.size(); ++c) {
    if (count[c] == 0) throw DataError("class " + std::to_string(c) + " has no samples; threshold undefined");
    sum[c] /= static_cast<double>(count[c]);
  }
  return sum;
}

std::size_t CleaningReport::flagged_count() const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CleaningRow& r) { return r.flagged; }));
}

std::vector<std::size_t> CleaningReport::flagged_indices() const {
  std::vector<std::size_t> out;
  for (const auto& r : rows) {
    if (r.flagged) out.push_back(r.index);
  }
  return out;
}

CleaningReport flag_mislabeled(const net::Matrix& probs, std::span<const int> labels,
                               std::span<const double> thresholds) {
  const auto classes = static_cast<std::size_t>(probs.cols());
  if (static_cast<std::size_t>(probs.rows()) != labels.size() || thresholds.size() != classes) {
    throw DataError("flag_mislabeled: inconsistent shapes");
  }
  check_labels(labels, static_cast<int>(classes));
  CleaningReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.flagged_pairs.assign(classes, std::vector<std::int64_t>(classes, 0));
  report.rows.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    Eigen::Index k = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(r, c) > probs(r, k)) k = c;
    }
    CleaningRow row{i, labels[i], static_cast<int>(k), probs(r, k), false};
    row.flagged = row.predicted != row.given && row.prob >= thresholds[static_cast<std::size_t>(k)];
    if (row.flagged) ++report.flagged_pairs[static_cast<std::size_t>(row.given)][static_cast<std::size_t>(row.predicted)];
    report.rows.push_back(row);
  }
  return report;
}

data::Dataset clean(const data::Dataset& samples, const CleaningReport& report, std::vector<std::string>* warnings) {
  std::vector<char> drop(samples.size(), 0);
  for (const auto& row : report.rows) {
    if (row.index >= samples.size()) {
      throw InternalError("cleaning report index " + std::to_string(row.index) + " out of range for " +
                          std::to_string(samples.size()) + " samples");
    }
    if (row.flagged) drop[row.index] = 1;
  }
  data::Dataset out;
  out.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!drop[i]) out.push_back(samples[i]);
  }
  if (out.empty() && warnings) warnings->push_back("label cleaning flagged every sample; dataset is empty");
  return out;
}

FoldTrainer net_fold_trainer(const NetFoldTrainerOptions& options) {
  return [options](const net::Matrix& train_x, std::span<const int> train_y, const net::Matrix& predict_x,
                   int class_count, int fold) {
    using net::LayerSpec;
    const auto act = net::HeadActivation::softmax;
    const std::vector<LayerSpec> arch{
        LayerSpec::dense(options.hidden_width), LayerSpec::batchnorm(), LayerSpec::relu(), LayerSpec::head(act),
        LayerSpec::dense(options.hidden_width), LayerSpec::batchnorm(), LayerSpec::relu(), LayerSpec::head(act),
        LayerSpec::dense(class_count),          LayerSpec::head(act, false)};
    const std::uint64_t seed = options.seed + 1000003ULL * static_cast<std::uint64_t>(fold);
    auto model = net::build_network(static_cast<int>(train_x.cols()), class_count, arch, seed);
    net::TrainOptions train;
    train.epochs = options.epochs;
    train.batch_size = options.batch_size;
    train.learning_rate = options.learning_rate;
    train.seed = seed;
    net::train_minibatch(model, train_x, train_y, net::LossKind::sparse_categorical, train);
    return net::Matrix(model.predict(predict_x).heads[net::kHeadCount - 1]);
  };
}

CleaningReport confident_learning(const data::Dataset& samples, const data::ActivityCatalog& catalog,
                                  const CleaningOptions& options) {
  // Work in provenance order so the outcome does not depend on input order.
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&samples](std::size_t a, std::size_t b) { return samples[a].provenance < samples[b].provenance; });
  data::Dataset sorted;
  sorted.reserve(samples.size());
  for (std::size_t i : order) sorted.push_back(samples[i]);

  const auto labels = data::activity_indices(sorted, catalog);
  const auto classes = static_cast<int>(catalog.entries().size());
  const auto probs = crossval_probs(data::feature_matrix(sorted), labels, classes, options.folds,
                                    net_fold_trainer(options.trainer), options.seed);
  auto report = flag_mislabeled(probs, labels, class_thresholds(probs, labels));
  std::vector<CleaningRow> rows(report.rows.size());
  for (auto& row : report.rows) {
    row.index = order[row.index];
    rows[row.index] = row;
  }
  report.rows = std::move(rows);
  return report;
}

void write_cleaning_csv(std::ostream& out, const CleaningReport& report, const std::vector<std::string>& labels) {
  const auto name = [&labels](int c) {
    return static_cast<std::size_t>(c) < labels.size() ? labels[static_cast<std::size_t>(c)] : std::to_string(c);
  };
  out << "index,given,predicted,prob,flagged\n";
  for (const auto& r : report.rows) {
    out << r.index << ',' << name(r.given) << ',' << name(r.predicted) << ',' << text::format_double(r.prob) << ','
        << (r.flagged ? 1 : 0) << '\n';
  }
}

nlohmann::json cleaning_summary(const CleaningReport& report, const std::vector<std::string>& labels) {
  nlohmann::json thresholds = nlohmann::json::object();
  for (std::size_t c = 0; c < report.thresholds.size(); ++c) {
    thresholds[c < labels.size() ? labels[c] : std::to_string(c)] = report.thresholds[c];
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t g = 0; g < report.flagged_pairs.size(); ++g) {
    for (std::size_t p = 0; p < report.flagged_pairs[g].size(); ++p) {
      if (report.flagged_pairs[g][p] == 0) continue;
      pairs.push_back({{"given", g < labels.size() ? labels[g] : std::to_string(g)},
                       {"predicted", p < labels.size() ? labels[p] : std::to_string(p)},
                       {"count", report.flagged_pairs[g][p]}});
    }
  }
  return {{"rule", CleaningReport::kRule},
          {"samples", report.rows.size()},
          {"flagged", report.flagged_count()},
          {"class_thresholds", thresholds},
          {"flagged_pairs", pairs}};
}

void write_cleaning_report(const CleaningReport& report, const std::vector<std::string>& labels,
                           const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw DataError("cannot write '" + csv_path.string() + "'");
  write_cleaning_csv(csv, report, labels);
  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw DataError("cannot write '" + json_path.string() + "'");
  js << cleaning_summary(report, labels).dump(2) << '\n';
}

}  // namespace fallcascade::cleaning
