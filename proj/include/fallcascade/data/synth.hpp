#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "fallcascade/data/skeleton.hpp"

namespace fallcascade::data {

// Gaussian activity clusters in normalized-skeleton feature space.
struct SynthConfig {
  std::uint64_t seed = 7;
  std::array<int, kActivityCount> per_class_counts{};  // indexed by activity code - 1
  // Distance of each class centre from a standing-pose template, along
  // mutually orthogonal directions in coordinate space.
  double separation = 5.0;
  double noise_sigma = 0.5;
  // When set, the i-th no-fall activity is centred this far from the i-th
  // fall class instead of at its own position, creating a narrow fall/no-fall
  // margin for each fall class.
  std::optional<double> boundary_separation;

  // ~5000 samples with 3% falls split evenly over the fall classes.
  static SynthConfig defaults(const ActivityCatalog& catalog = ActivityCatalog::up_fall());
  static SynthConfig with_fall_fraction(int total, double fall_fraction,
                                        const ActivityCatalog& catalog = ActivityCatalog::up_fall());

  // {seed, per_class_counts, separation, noise_sigma[, boundary_separation]};
  // {total, fall_fraction} take precedence over per_class_counts.
  static SynthConfig from_json(const nlohmann::json& j, const ActivityCatalog& catalog = ActivityCatalog::up_fall());
  nlohmann::json to_json() const;

  int total() const;
  void validate() const;
};

// Samples are shuffled; provenance keys are unique (frame id = sample index).
Dataset synthesize_dataset(const SynthConfig& config, const ActivityCatalog& catalog = ActivityCatalog::up_fall());

struct RenderOptions {
  double pixel_scale = 200.0;
  double origin_x = 320.0;
  double origin_y = 240.0;
  // Fraction of frames that also get a smaller, dimmer second detection.
  double reflection_fraction = 0.0;
  std::uint64_t seed = 7;
};

// Turns feature vectors back into pixel-space keypoint rows (one per sample,
// plus any injected reflections).
std::vector<SkeletonFrame> render_frames(const Dataset& samples, const RenderOptions& options = {});

}  // namespace fallcascade::data
