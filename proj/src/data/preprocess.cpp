#include "fallcascade/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "fallcascade/error.hpp"

namespace fallcascade::data {

namespace {

struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  int count = 0;
  double confidence_sum = 0.0;

  double diagonal() const { return std::hypot(max_x - min_x, max_y - min_y); }
};

bool confident(const Keypoint& kp, const BlankFrameRule& rule) { return kp.confidence > rule.min_confidence; }

Box confident_box(const SkeletonFrame& frame, const BlankFrameRule& rule) {
  Box box;
  for (const auto& kp : frame.keypoints) {
    if (!confident(kp, rule)) continue;
    box.min_x = std::min(box.min_x, kp.x);
    box.min_y = std::min(box.min_y, kp.y);
    box.max_x = std::max(box.max_x, kp.x);
    box.max_y = std::max(box.max_y, kp.y);
    box.confidence_sum += kp.confidence;
    ++box.count;
  }
  return box;
}

std::string frame_name(const SkeletonFrame& f) {
  std::string name = Provenance{f.camera_id, f.subject_id, f.trial_id, f.frame_id}.key();
  if (f.source_line) name += " (line " + std::to_string(f.source_line) + ")";
  return name;
}

}  // namespace

void BlankFrameRule::validate() const {
  if (min_keypoints < 1 || min_keypoints > kKeypointCount) {
    throw ConfigError("blank_frames.min_keypoints must be in 1..17");
  }
  if (!(min_confidence >= 0.0 && min_confidence < 1.0)) {
    throw ConfigError("blank_frames.min_confidence must be in [0, 1)");
  }
}

int confident_keypoint_count(const SkeletonFrame& frame, const BlankFrameRule& rule) {
  return static_cast<int>(std::count_if(frame.keypoints.begin(), frame.keypoints.end(),
                                        [&](const Keypoint& kp) { return confident(kp, rule); }));
}

std::vector<SkeletonFrame> remove_blank_frames(std::vector<SkeletonFrame> frames, const BlankFrameRule& rule) {
  std::erase_if(frames, [&](const SkeletonFrame& f) { return confident_keypoint_count(f, rule) < rule.min_keypoints; });
  return frames;
}

double distance_score(const SkeletonFrame& frame, const BlankFrameRule& rule) {
  const Box box = confident_box(frame, rule);
  if (box.count == 0) throw DataError("distance score undefined for " + frame_name(frame) + ": no confident keypoints");
  return box.diagonal() * (box.confidence_sum / box.count);
}

std::vector<SkeletonFrame> select_primary_subject(const std::vector<SkeletonFrame>& frames,
                                                  const BlankFrameRule& rule) {
  using Key = std::tuple<int, int, int, long long>;
  std::map<Key, std::size_t> slot;  // key -> index into `kept`
  std::vector<SkeletonFrame> kept;
  std::vector<double> scores;
  for (const auto& f : frames) {
    const Key key{f.subject_id, f.trial_id, f.camera_id, f.frame_id};
    const double score = distance_score(f, rule);
    auto [it, inserted] = slot.try_emplace(key, kept.size());
    if (inserted) {
      kept.push_back(f);
      scores.push_back(score);
    } else if (score > scores[it->second]) {
      kept[it->second] = f;
      scores[it->second] = score;
    }
  }
  return kept;
}

FeatureVector normalize(const SkeletonFrame& frame, const ActivityCatalog& catalog, const BlankFrameRule& rule) {
  const Box box = confident_box(frame, rule);
  if (box.count == 0) throw DataError("cannot normalize " + frame_name(frame) + ": no confident keypoints");
  const double diagonal = box.diagonal();
  if (!(diagonal > 0.0)) throw DataError("cannot normalize " + frame_name(frame) + ": degenerate skeleton");

  const Keypoint& lh = frame.keypoints[kLeftHip];
  const Keypoint& rh = frame.keypoints[kRightHip];
  double cx = 0.0;
  double cy = 0.0;
  if (confident(lh, rule) && confident(rh, rule)) {
    cx = 0.5 * (lh.x + rh.x);
    cy = 0.5 * (lh.y + rh.y);
  } else if (confident(lh, rule) || confident(rh, rule)) {
    const Keypoint& hip = confident(lh, rule) ? lh : rh;
    cx = hip.x;
    cy = hip.y;
  } else {
    cx = 0.5 * (box.min_x + box.max_x);
    cy = 0.5 * (box.min_y + box.max_y);
  }

  FeatureVector out;
  for (int k = 0; k < kKeypointCount; ++k) {
    const Keypoint& kp = frame.keypoints[static_cast<std::size_t>(k)];
    const auto base = 3 * static_cast<std::size_t>(k);
    if (confident(kp, rule)) {
      out.values[base] = (kp.x - cx) / diagonal;
      out.values[base + 1] = (kp.y - cy) / diagonal;
    }
    out.values[base + 2] = kp.confidence;
  }
  const ActivityLabel label = catalog.label(frame.activity_code);
  out.activity_code = frame.activity_code;
  out.binary_label = label.is_fall() ? 1 : 0;
  if (label.fall_class) out.multi_label = static_cast<int>(*label.fall_class);
  out.provenance = Provenance{frame.camera_id, frame.subject_id, frame.trial_id, frame.frame_id};
  return out;
}

Dataset normalize_all(const std::vector<SkeletonFrame>& frames, const ActivityCatalog& catalog,
                      const BlankFrameRule& rule) {
  Dataset out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(normalize(f, catalog, rule));
  return out;
}

}  // namespace fallcascade::data
