#include "fallcascade/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fallcascade/error.hpp"

namespace fallcascade::data {

namespace {

constexpr int kCoordinateDims = 2 * kKeypointCount;
constexpr double kConfidenceMean = 0.85;
constexpr double kConfidenceSigma = 0.05;

// Upright standing pose, hip midpoint at the origin, y pointing down.
constexpr std::array<std::array<double, 2>, kKeypointCount> kStandingPose{{
    {0.00, -0.55}, {-0.03, -0.58}, {0.03, -0.58}, {-0.06, -0.56}, {0.06, -0.56}, {-0.12, -0.40},
    {0.12, -0.40}, {-0.15, -0.20}, {0.15, -0.20}, {-0.16, -0.02}, {0.16, -0.02}, {-0.08, 0.00},
    {0.08, 0.00},  {-0.08, 0.22},  {0.08, 0.22},  {-0.08, 0.43},  {0.08, 0.43},
}};

using Direction = std::array<double, kCoordinateDims>;

// Gram-Schmidt over Gaussian draws.
std::vector<Direction> orthonormal_directions(std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Direction> basis;
  while (basis.size() < count) {
    Direction v;
    for (auto& x : v) x = normal(rng);
    for (const auto& b : basis) {
      const double dot = std::inner_product(v.begin(), v.end(), b.begin(), 0.0);
      for (int k = 0; k < kCoordinateDims; ++k) v[static_cast<std::size_t>(k)] -= dot * b[static_cast<std::size_t>(k)];
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm < 1e-6) continue;
    for (auto& x : v) x /= norm;
    basis.push_back(v);
  }
  return basis;
}

std::size_t coordinate_slot(int dim) {
  // dims 0..33 map onto x1,y1,x2,y2,... inside the 51-wide layout
  return 3 * static_cast<std::size_t>(dim / 2) + static_cast<std::size_t>(dim % 2);
}

}  // namespace

int SynthConfig::total() const { return std::accumulate(per_class_counts.begin(), per_class_counts.end(), 0); }

void SynthConfig::validate() const {
  for (std::size_t c = 0; c < per_class_counts.size(); ++c) {
    if (per_class_counts[c] < 1) {
      throw ConfigError("synth: activity " + std::to_string(c + 1) + " needs at least one sample");
    }
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) throw ConfigError("synth: separation must be >= 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("synth: noise_sigma must be >= 0");
  if (boundary_separation && !(*boundary_separation >= 0.0)) {
    throw ConfigError("synth: boundary_separation must be >= 0");
  }
}

SynthConfig SynthConfig::with_fall_fraction(int total, double fall_fraction, const ActivityCatalog& catalog) {
  if (!(fall_fraction > 0.0 && fall_fraction < 1.0)) throw ConfigError("synth: fall_fraction must lie in (0, 1)");
  const auto falls = catalog.fall_codes();
  const auto others = catalog.no_fall_codes();
  const int fall_total = static_cast<int>(std::lround(fall_fraction * total));
  const int other_total = total - fall_total;
  SynthConfig cfg;
  const auto spread = [&cfg](const std::vector<int>& codes, int count) {
    const int n = static_cast<int>(codes.size());
    for (int i = 0; i < n; ++i) cfg.per_class_counts[static_cast<std::size_t>(codes[static_cast<std::size_t>(i)] - 1)] = count / n + (i < count % n ? 1 : 0);
  };
  spread(falls, fall_total);
  spread(others, other_total);
  return cfg;
}

SynthConfig SynthConfig::defaults(const ActivityCatalog& catalog) { return with_fall_fraction(5000, 0.03, catalog); }

SynthConfig SynthConfig::from_json(const nlohmann::json& j, const ActivityCatalog& catalog) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  static const std::vector<std::string> known{"seed",  "per_class_counts", "separation",        "noise_sigma",
                                              "total", "fall_fraction",    "boundary_separation"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("synth: unknown key '" + key + "'");
  }
  SynthConfig cfg = defaults(catalog);
  try {
    if (j.contains("total") || j.contains("fall_fraction")) {
      cfg.per_class_counts = with_fall_fraction(j.value("total", 5000), j.value("fall_fraction", 0.03), catalog).per_class_counts;
    } else if (j.contains("per_class_counts")) {
      const auto counts = j.at("per_class_counts").get<std::vector<int>>();
      if (counts.size() != kActivityCount) throw ConfigError("synth: per_class_counts needs 11 entries");
      std::copy(counts.begin(), counts.end(), cfg.per_class_counts.begin());
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.separation = j.value("separation", cfg.separation);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    if (j.contains("boundary_separation") && !j.at("boundary_separation").is_null()) {
      cfg.boundary_separation = j.at("boundary_separation").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json SynthConfig::to_json() const {
  nlohmann::json j{{"seed", seed},
                   {"per_class_counts", std::vector<int>(per_class_counts.begin(), per_class_counts.end())},
                   {"separation", separation},
                   {"noise_sigma", noise_sigma}};
  j["boundary_separation"] = boundary_separation ? nlohmann::json(*boundary_separation) : nlohmann::json();
  return j;
}

Dataset synthesize_dataset(const SynthConfig& config, const ActivityCatalog& catalog) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const auto falls = catalog.fall_codes();
  const auto others = catalog.no_fall_codes();
  const auto directions = orthonormal_directions(kActivityCount + falls.size(), rng);

  // Class centres in the 34 coordinate dimensions.
  std::array<Direction, kActivityCount> centres{};
  for (int c = 0; c < kActivityCount; ++c) {
    auto& centre = centres[static_cast<std::size_t>(c)];
    for (int d = 0; d < kCoordinateDims; ++d) {
      centre[static_cast<std::size_t>(d)] = kStandingPose[static_cast<std::size_t>(d / 2)][static_cast<std::size_t>(d % 2)] +
                                            config.separation * directions[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)];
    }
  }
  if (config.boundary_separation) {
    for (std::size_t i = 0; i < falls.size() && i < others.size(); ++i) {
      const auto& fall_centre = centres[static_cast<std::size_t>(falls[i] - 1)];
      auto& partner = centres[static_cast<std::size_t>(others[i] - 1)];
      const auto& offset = directions[kActivityCount + i];
      for (std::size_t d = 0; d < kCoordinateDims; ++d) partner[d] = fall_centre[d] + *config.boundary_separation * offset[d];
    }
  }

  std::normal_distribution<double> noise(0.0, config.noise_sigma);
  std::normal_distribution<double> confidence(kConfidenceMean, kConfidenceSigma);
  Dataset samples;
  samples.reserve(static_cast<std::size_t>(config.total()));
  for (int c = 0; c < kActivityCount; ++c) {
    const int code = c + 1;
    const ActivityLabel label = catalog.label(code);
    for (int n = 0; n < config.per_class_counts[static_cast<std::size_t>(c)]; ++n) {
      FeatureVector s;
      for (int d = 0; d < kCoordinateDims; ++d) {
        s.values[coordinate_slot(d)] = centres[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] + noise(rng);
      }
      for (int k = 0; k < kKeypointCount; ++k) {
        s.values[3 * static_cast<std::size_t>(k) + 2] = std::clamp(confidence(rng), 0.0, 1.0);
      }
      s.activity_code = code;
      s.binary_label = label.is_fall() ? 1 : 0;
      if (label.fall_class) s.multi_label = static_cast<int>(*label.fall_class);
      samples.push_back(s);
    }
  }
  std::shuffle(samples.begin(), samples.end(), rng);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].provenance = Provenance{1, 1 + static_cast<int>(i % 17), 1 + static_cast<int>((i / 17) % 3),
                                       static_cast<long long>(i)};
  }
  return samples;
}

std::vector<SkeletonFrame> render_frames(const Dataset& samples, const RenderOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::bernoulli_distribution reflect(options.reflection_fraction);
  std::bernoulli_distribution before(0.5);
  std::vector<SkeletonFrame> frames;
  frames.reserve(samples.size());
  for (const auto& s : samples) {
    SkeletonFrame f;
    f.camera_id = s.provenance.camera_id;
    f.subject_id = s.provenance.subject_id;
    f.trial_id = s.provenance.trial_id;
    f.frame_id = s.provenance.frame_id;
    f.activity_code = s.activity_code;
    for (int k = 0; k < kKeypointCount; ++k) {
      const auto base = 3 * static_cast<std::size_t>(k);
      f.keypoints[static_cast<std::size_t>(k)] = {options.origin_x + options.pixel_scale * s.values[base],
                                                  options.origin_y + options.pixel_scale * s.values[base + 1],
                                                  s.values[base + 2]};
    }
    if (options.reflection_fraction > 0.0 && reflect(rng)) {
      // Half-size, dimmer copy shifted sideways, as seen in a glass wall.
      SkeletonFrame ghost = f;
      for (auto& kp : ghost.keypoints) {
        kp.x = options.origin_x + 150.0 + 0.5 * (kp.x - options.origin_x);
        kp.y = options.origin_y + 0.5 * (kp.y - options.origin_y);
        kp.confidence *= 0.7;
      }
      if (before(rng)) {
        frames.push_back(ghost);
        frames.push_back(f);
      } else {
        frames.push_back(f);
        frames.push_back(ghost);
      }
    } else {
      frames.push_back(f);
    }
  }
  return frames;
}

}  // namespace fallcascade::data
