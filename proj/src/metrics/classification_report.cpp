#include "fallcascade/metrics/classification_report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fallcascade/error.hpp"
#include "fallcascade/text.hpp"

namespace fallcascade::metrics {

std::int64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(truth, p);
  return s;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::int64_t s = 0;
  for (std::size_t t = 0; t < classes_; ++t) s += at(t, predicted);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw DataError("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes) {
  if (truth.size() != predicted.size()) {
    throw DataError("confusion: " + std::to_string(truth.size()) + " truths vs " +
                    std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes || static_cast<std::size_t>(p) >= classes) {
      throw DataError("confusion: pair " + std::to_string(i) + " has a class outside [0, " +
                      std::to_string(classes) + ")");
    }
    ++m.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return m;
}

const ClassMetrics& ClassificationReport::operator[](std::string_view label) const {
  for (const auto& c : classes) {
    if (c.label == label) return c;
  }
  throw DataError("report has no class '" + std::string(label) + "'");
}

ClassificationReport report(const ConfusionMatrix& matrix, const std::vector<std::string>& labels) {
  if (labels.size() != matrix.classes()) {
    throw DataError("report: " + std::to_string(labels.size()) + " labels for a " +
                    std::to_string(matrix.classes()) + "-class matrix");
  }
  ClassificationReport r;
  r.labels = labels;
  r.matrix = matrix;
  double f1_sum = 0.0;
  int scored = 0;
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < matrix.classes(); ++c) {
    ClassMetrics m;
    m.label = labels[c];
    const auto tp = matrix.at(c, c);
    const auto predicted = matrix.column_sum(c);
    m.support = matrix.row_sum(c);
    correct += tp;
    m.precision_undefined = predicted == 0;
    m.recall_undefined = m.support == 0;
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = m.support ? static_cast<double>(tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (m.support > 0) {
      f1_sum += m.f1;
      ++scored;
    }
    r.classes.push_back(std::move(m));
  }
  r.macro_f1 = scored ? f1_sum / scored : 0.0;
  const auto total = matrix.total();
  r.accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return r;
}

std::string report_csv(const ClassificationReport& r) {
  std::ostringstream out;
  out << "class,support,precision,recall,f1\n";
  for (const auto& c : r.classes) {
    out << c.label << ',' << c.support << ',' << text::format_double(c.precision) << ','
        << text::format_double(c.recall) << ',' << text::format_double(c.f1) << '\n';
  }
  return out.str();
}

nlohmann::json report_summary(const ClassificationReport& r) {
  nlohmann::json j;
  j["labels"] = r.labels;
  j["macro_f1"] = r.macro_f1;
  j["accuracy"] = r.accuracy;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < r.matrix.classes(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < r.matrix.classes(); ++p) row.push_back(r.matrix.at(t, p));
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& c : r.classes) {
    if (c.recall_undefined) flags.push_back({{"class", c.label}, {"flag", "zero_support"}});
    if (c.precision_undefined) flags.push_back({{"class", c.label}, {"flag", "never_predicted"}});
  }
  j["flags"] = std::move(flags);
  return j;
}

std::string format_report(const ClassificationReport& r) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %8s %9s %7s %5s\n", "class", "support", "precision", "recall", "f1");
  out << line;
  for (const auto& c : r.classes) {
    std::snprintf(line, sizeof line, "%-10s %8lld %9.2f %7.2f %5.2f%s\n", c.label.c_str(),
                  static_cast<long long>(c.support), c.precision, c.recall, c.f1,
                  c.recall_undefined ? "  (no support)" : "");
    out << line;
  }
  std::snprintf(line, sizeof line, "macro-F1 %.2f  accuracy %.2f\n", r.macro_f1, r.accuracy);
  out << line;
  return out.str();
}

void write_report(const ClassificationReport& r, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path, std::ios::binary);
  std::ofstream json(json_path, std::ios::binary);
  if (!csv || !json) throw DataError("cannot write report to '" + csv_path.parent_path().string() + "'");
  csv << report_csv(r);
  json << report_summary(r).dump(2) << '\n';
}

}  // namespace fallcascade::metrics
