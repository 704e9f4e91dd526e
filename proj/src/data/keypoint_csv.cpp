#include "fallcascade/data/keypoint_csv.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "fallcascade/error.hpp"
#include "fallcascade/text.hpp"

namespace fallcascade::data {

namespace {

constexpr std::size_t kMetaColumns = 5;
constexpr std::size_t kKeypointColumns = kMetaColumns + kFeatureWidth;
constexpr std::size_t kDatasetColumns = kKeypointColumns + 2;

class RowReader {
 public:
  RowReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Returns false at end of input; skips blank lines.
  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (line_no_ == 1 && line_.size() >= 3 && line_.compare(0, 3, "\xEF\xBB\xBF") == 0) line_.erase(0, 3);
      if (line_.find_first_not_of(" \t\r") == std::string::npos) continue;
      fields = text::split_csv_line(line_);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }

  long long integer(std::string_view field, const char* column) const {
    long long v = 0;
    if (!text::parse_int(field, v)) fail(std::string(column) + ": '" + std::string(field) + "' is not an integer");
    return v;
  }

  double real(std::string_view field, const std::string& column) const {
    double v = 0;
    if (!text::parse_double(field, v) || !std::isfinite(v)) {
      fail(column + ": '" + std::string(field) + "' is not a finite number");
    }
    return v;
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
};

void expect_header(RowReader& reader, const std::vector<std::string>& expected) {
  std::vector<std::string_view> fields;
  if (!reader.next(fields)) reader.fail("missing header row");
  if (fields.size() != expected.size()) {
    reader.fail("header has " + std::to_string(fields.size()) + " columns, expected " +
                std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i] != expected[i]) {
      reader.fail("header column " + std::to_string(i + 1) + " is '" + std::string(fields[i]) + "', expected '" +
                  expected[i] + "'");
    }
  }
}

void read_frame_fields(const RowReader& reader, const std::vector<std::string_view>& fields, SkeletonFrame& frame) {
  frame.camera_id = static_cast<int>(reader.integer(fields[0], "camera_id"));
  frame.subject_id = static_cast<int>(reader.integer(fields[1], "subject_id"));
  frame.trial_id = static_cast<int>(reader.integer(fields[2], "trial_id"));
  frame.frame_id = reader.integer(fields[3], "frame_id");
  frame.activity_code = static_cast<int>(reader.integer(fields[4], "activity_code"));
  if (frame.activity_code < 1 || frame.activity_code > kActivityCount) {
    reader.fail("activity_code " + std::to_string(frame.activity_code) + " outside 1.." +
                std::to_string(kActivityCount));
  }
  for (int k = 0; k < kKeypointCount; ++k) {
    const auto base = kMetaColumns + 3 * static_cast<std::size_t>(k);
    const std::string idx = std::to_string(k + 1);
    Keypoint& kp = frame.keypoints[static_cast<std::size_t>(k)];
    kp.x = reader.real(fields[base], "x" + idx);
    kp.y = reader.real(fields[base + 1], "y" + idx);
    kp.confidence = reader.real(fields[base + 2], "c" + idx);
    if (kp.confidence < 0.0 || kp.confidence > 1.0) reader.fail("c" + idx + ": confidence outside [0, 1]");
  }
  frame.source_line = reader.line();
}

void write_meta(std::ostream& out, const Provenance& p, int activity) {
  out << p.camera_id << ',' << p.subject_id << ',' << p.trial_id << ',' << p.frame_id << ',' << activity;
}

}  // namespace

std::vector<std::string> keypoint_csv_header() {
  std::vector<std::string> h{"camera_id", "subject_id", "trial_id", "frame_id", "activity_code"};
  for (int k = 1; k <= kKeypointCount; ++k) {
    for (const char* axis : {"x", "y", "c"}) h.push_back(axis + std::to_string(k));
  }
  return h;
}

std::vector<std::string> dataset_csv_header() {
  auto h = keypoint_csv_header();
  h.emplace_back("binary_label");
  h.emplace_back("multi_label");
  return h;
}

std::vector<SkeletonFrame> parse_keypoint_csv(std::istream& in, const std::string& source) {
  RowReader reader(in, source);
  expect_header(reader, keypoint_csv_header());
  std::vector<SkeletonFrame> frames;
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    if (fields.size() != kKeypointColumns) {
      reader.fail("expected " + std::to_string(kKeypointColumns) + " columns (17 keypoints), got " +
                  std::to_string(fields.size()));
    }
    SkeletonFrame frame;
    read_frame_fields(reader, fields, frame);
    frames.push_back(frame);
  }
  return frames;
}

std::vector<SkeletonFrame> parse_keypoint_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open keypoint file '" + path.string() + "'");
  return parse_keypoint_csv(in, path.string());
}

void write_keypoint_csv(std::ostream& out, const std::vector<SkeletonFrame>& frames) {
  out << text::join(keypoint_csv_header(), ",") << '\n';
  for (const auto& f : frames) {
    write_meta(out, Provenance{f.camera_id, f.subject_id, f.trial_id, f.frame_id}, f.activity_code);
    for (const auto& kp : f.keypoints) {
      out << ',' << text::format_double(kp.x) << ',' << text::format_double(kp.y) << ','
          << text::format_double(kp.confidence);
    }
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in, const ActivityCatalog& catalog, const std::string& source) {
  RowReader reader(in, source);
  expect_header(reader, dataset_csv_header());
  Dataset samples;
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    if (fields.size() != kDatasetColumns) {
      reader.fail("expected " + std::to_string(kDatasetColumns) + " columns, got " + std::to_string(fields.size()));
    }
    FeatureVector s;
    s.provenance.camera_id = static_cast<int>(reader.integer(fields[0], "camera_id"));
    s.provenance.subject_id = static_cast<int>(reader.integer(fields[1], "subject_id"));
    s.provenance.trial_id = static_cast<int>(reader.integer(fields[2], "trial_id"));
    s.provenance.frame_id = reader.integer(fields[3], "frame_id");
    s.activity_code = static_cast<int>(reader.integer(fields[4], "activity_code"));
    if (s.activity_code < 1 || s.activity_code > kActivityCount) reader.fail("activity_code out of range");
    for (int k = 0; k < kFeatureWidth; ++k) {
      s.values[static_cast<std::size_t>(k)] =
          reader.real(fields[kMetaColumns + static_cast<std::size_t>(k)], "feature " + std::to_string(k + 1));
    }
    const long long binary = reader.integer(fields[kKeypointColumns], "binary_label");
    const long long multi = reader.integer(fields[kKeypointColumns + 1], "multi_label");
    const ActivityLabel label = catalog.label(s.activity_code);
    if (binary != (label.is_fall() ? 1 : 0)) reader.fail("binary_label disagrees with activity_code");
    if (label.is_fall() ? multi != static_cast<long long>(*label.fall_class) : multi != -1) {
      reader.fail("multi_label disagrees with activity_code");
    }
    s.binary_label = static_cast<int>(binary);
    if (multi >= 0) s.multi_label = static_cast<int>(multi);
    samples.push_back(s);
  }
  return samples;
}

Dataset read_dataset_csv(const std::filesystem::path& path, const ActivityCatalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
  return read_dataset_csv(in, catalog, path.string());
}

void write_dataset_csv(std::ostream& out, const Dataset& samples) {
  out << text::join(dataset_csv_header(), ",") << '\n';
  for (const auto& s : samples) {
    write_meta(out, s.provenance, s.activity_code);
    for (double v : s.values) out << ',' << text::format_double(v);
    out << ',' << s.binary_label << ',' << (s.multi_label ? *s.multi_label : -1) << '\n';
  }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
  write_dataset_csv(out, samples);
}

bool is_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string header;
  std::getline(in, header);
  return header.find("binary_label") != std::string::npos;
}

}  // namespace fallcascade::data
