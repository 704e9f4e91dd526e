#pragma once

#include <vector>

#include "fallcascade/data/skeleton.hpp"

namespace fallcascade::data {

// A keypoint is confident when its confidence exceeds `min_confidence`; a frame
// with fewer than `min_keypoints` confident keypoints is blank.
struct BlankFrameRule {
  int min_keypoints = 5;
  double min_confidence = 0.1;

  void validate() const;
};

int confident_keypoint_count(const SkeletonFrame& frame, const BlankFrameRule& rule);

std::vector<SkeletonFrame> remove_blank_frames(std::vector<SkeletonFrame> frames, const BlankFrameRule& rule = {});

// Bounding-box diagonal of the confident keypoints (pixels) times their mean
// confidence. Larger means a bigger, nearer, more confidently detected person.
double distance_score(const SkeletonFrame& frame, const BlankFrameRule& rule = {});

// Keeps the highest-scoring detection per (subject, trial, camera, frame);
// ties go to the earlier row. Output follows first appearance of each frame.
std::vector<SkeletonFrame> select_primary_subject(const std::vector<SkeletonFrame>& frames,
                                                  const BlankFrameRule& rule = {});

// Translates the hip midpoint to the origin and divides by the confident
// bounding-box diagonal. Unconfident keypoints get zero coordinates; all
// confidences are copied through. The hip midpoint falls back to the one
// confident hip, then to the bounding-box centre.
FeatureVector normalize(const SkeletonFrame& frame, const ActivityCatalog& catalog, const BlankFrameRule& rule = {});

Dataset normalize_all(const std::vector<SkeletonFrame>& frames, const ActivityCatalog& catalog,
                      const BlankFrameRule& rule = {});

}  // namespace fallcascade::data
