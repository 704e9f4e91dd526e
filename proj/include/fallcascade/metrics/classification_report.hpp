#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fallcascade::metrics {

// Square count matrix, rows = truth, columns = prediction.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {}

  std::size_t classes() const { return classes_; }
  std::int64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * classes_ + predicted]; }
  std::int64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * classes_ + predicted]; }

  std::int64_t row_sum(std::size_t truth) const;
  std::int64_t column_sum(std::size_t predicted) const;
  std::int64_t total() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t classes_ = 0;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, std::size_t classes);

struct ClassMetrics {
  std::string label;
  std::int64_t support = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the denominator was empty and the value was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct ClassificationReport {
  std::vector<std::string> labels;
  ConfusionMatrix matrix;
  std::vector<ClassMetrics> classes;
  // Unweighted mean F1 over classes with non-zero support.
  double macro_f1 = 0.0;
  double accuracy = 0.0;

  const ClassMetrics& operator[](std::string_view label) const;
};

ClassificationReport report(const ConfusionMatrix& matrix, const std::vector<std::string>& labels);

// `class,support,precision,recall,f1` with full-precision values.
std::string report_csv(const ClassificationReport& r);
nlohmann::json report_summary(const ClassificationReport& r);
// Human-readable table, values rounded to two decimals.
std::string format_report(const ClassificationReport& r);

void write_report(const ClassificationReport& r, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

}  // namespace fallcascade::metrics
