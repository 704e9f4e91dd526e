#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "fallcascade/data/skeleton.hpp"

namespace fallcascade::data {

enum class SplitStrategy { random_stratified, by_trial };

std::string_view to_string(SplitStrategy s);
SplitStrategy split_strategy_from_string(std::string_view name);

struct SplitSpec {
  double train_fraction = 0.7;
  SplitStrategy strategy = SplitStrategy::random_stratified;
  std::uint64_t seed = 7;
};

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Per-stratum sampling without replacement. The train side gets
// round(fraction * n) items overall, allotted to strata by largest remainder,
// so each stratum is within one item of its exact share.
SplitIndices stratified_split_indices(std::span<const int> strata, double train_fraction, std::uint64_t seed);

// Whole (subject, trial) groups go to one side.
SplitIndices grouped_split_indices(const Dataset& samples, double train_fraction, std::uint64_t seed);

// Stratifies on the activity code. Throws ConfigError if either side is empty.
std::pair<Dataset, Dataset> split(const Dataset& samples, const SplitSpec& spec);

Dataset select(const Dataset& samples, std::span<const std::size_t> indices);

}  // namespace fallcascade::data
