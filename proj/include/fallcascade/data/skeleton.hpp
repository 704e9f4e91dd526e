#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fallcascade/net/layer.hpp"

namespace fallcascade::data {

inline constexpr int kKeypointCount = 17;
inline constexpr int kFeatureWidth = 3 * kKeypointCount;
inline constexpr int kActivityCount = 11;
inline constexpr int kFallClassCount = 5;

// COCO keypoint order as emitted by the pose estimator.
inline constexpr std::array<std::string_view, kKeypointCount> kKeypointNames{
    "nose",        "left_eye",   "right_eye",  "left_ear",  "right_ear",  "left_shoulder",
    "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip",
    "right_hip",   "left_knee",  "right_knee", "left_ankle", "right_ankle"};
inline constexpr int kLeftHip = 11;
inline constexpr int kRightHip = 12;

enum class FallClass { HF = 0, KF, BF, SF, SDF };

inline constexpr std::array<std::string_view, kFallClassCount> kFallClassNames{"HF", "KF", "BF", "SF", "SDF"};

std::string_view to_string(FallClass c);
std::optional<FallClass> fall_class_from_string(std::string_view name);
std::vector<std::string> fall_class_labels();

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

// One person detection in one video frame.
struct SkeletonFrame {
  int camera_id = 0;
  int subject_id = 0;
  int trial_id = 0;
  long long frame_id = 0;
  int activity_code = 0;
  std::array<Keypoint, kKeypointCount> keypoints{};
  std::size_t source_line = 0;  // 1-based line in the source file, 0 when synthetic
};

struct ActivityLabel {
  int code = 0;
  std::optional<FallClass> fall_class;  // set iff the activity is a fall

  bool is_fall() const { return fall_class.has_value(); }
};

// Maps the 11 activity codes onto names and fall classes. Each fall class is
// carried by exactly one code.
class ActivityCatalog {
 public:
  struct Entry {
    int code = 0;
    std::string name;
    std::optional<FallClass> fall_class;
  };

  // UP-Fall numbering: 1-5 falls (HF, KF, BF, SF, SDF), 6-11 daily activities.
  static ActivityCatalog up_fall();
  static ActivityCatalog from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  ActivityLabel label(int code) const;
  const Entry& entry(int code) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<int> fall_codes() const;
  std::vector<int> no_fall_codes() const;

 private:
  explicit ActivityCatalog(std::vector<Entry> entries);
  std::vector<Entry> entries_;
};

struct Provenance {
  int camera_id = 0;
  int subject_id = 0;
  int trial_id = 0;
  long long frame_id = 0;

  // "s<subject>-t<trial>-c<camera>-f<frame>"
  std::string key() const;
  auto operator<=>(const Provenance&) const = default;
};

struct FeatureVector {
  std::array<double, kFeatureWidth> values{};  // x, y, confidence per keypoint
  int activity_code = 0;
  int binary_label = 0;
  std::optional<int> multi_label;  // fall class index when binary_label == 1
  Provenance provenance;
};

using Dataset = std::vector<FeatureVector>;

net::Matrix feature_matrix(const Dataset& samples);
std::vector<int> binary_labels(const Dataset& samples);
// Throws DataError when a sample has no fall class.
std::vector<int> fall_labels(const Dataset& samples);
// Activity code minus one, for 11-way label cleaning.
std::vector<int> activity_indices(const Dataset& samples, const ActivityCatalog& catalog);

}  // namespace fallcascade::data
