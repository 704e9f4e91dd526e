#include "fallcascade/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "fallcascade/error.hpp"

namespace fallcascade::data {

std::string_view to_string(SplitStrategy s) {
  return s == SplitStrategy::random_stratified ? "random_stratified" : "by_trial";
}

SplitStrategy split_strategy_from_string(std::string_view name) {
  if (name == "random_stratified") return SplitStrategy::random_stratified;
  if (name == "by_trial") return SplitStrategy::by_trial;
  throw ConfigError("unknown split strategy '" + std::string(name) + "'");
}

namespace {

void check_fraction(double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
}

void check_sides(const SplitIndices& s, std::size_t n, double fraction) {
  if (s.train.empty() || s.test.empty()) {
    throw ConfigError("train_fraction " + std::to_string(fraction) + " on " + std::to_string(n) +
                      " items leaves an empty " + (s.train.empty() ? "train" : "test") + " side");
  }
}

}  // namespace

SplitIndices stratified_split_indices(std::span<const int> strata, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  if (strata.empty()) throw ConfigError("cannot split an empty dataset");

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);

  const auto target = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(strata.size())));
  struct Quota {
    int stratum;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t allotted = 0;
  for (const auto& [stratum, members] : groups) {
    const double exact = train_fraction * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(exact));
    quotas.push_back({stratum, base, exact - static_cast<double>(base)});
    allotted += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (std::size_t k = 0; allotted < target && k < order.size(); ++k, ++allotted) ++quotas[order[k]].take;

  std::mt19937_64 rng(seed);
  SplitIndices out;
  for (const auto& q : quotas) {
    auto members = groups[q.stratum];
    std::shuffle(members.begin(), members.end(), rng);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q.take));
    out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(q.take), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  check_sides(out, strata.size(), train_fraction);
  return out;
}

SplitIndices grouped_split_indices(const Dataset& samples, double train_fraction, std::uint64_t seed) {
  check_fraction(train_fraction);
  if (samples.empty()) throw ConfigError("cannot split an empty dataset");
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups[{samples[i].provenance.subject_id, samples[i].provenance.trial_id}].push_back(i);
  }
  std::vector<std::pair<int, int>> keys;
  for (const auto& [key, members] : groups) keys.push_back(key);
  std::mt19937_64 rng(seed);
  std::shuffle(keys.begin(), keys.end(), rng);
  const auto train_groups = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(keys.size())));

  SplitIndices out;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    auto& side = g < train_groups ? out.train : out.test;
    const auto& members = groups[keys[g]];
    side.insert(side.end(), members.begin(), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  check_sides(out, samples.size(), train_fraction);
  return out;
}

Dataset select(const Dataset& samples, std::span<const std::size_t> indices) {
  Dataset out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(samples.at(i));
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& samples, const SplitSpec& spec) {
  SplitIndices idx;
  if (spec.strategy == SplitStrategy::random_stratified) {
    std::vector<int> strata;
    strata.reserve(samples.size());
    for (const auto& s : samples) strata.push_back(s.activity_code);
    idx = stratified_split_indices(strata, spec.train_fraction, spec.seed);
  } else {
    idx = grouped_split_indices(samples, spec.train_fraction, spec.seed);
  }
  return {select(samples, idx.train), select(samples, idx.test)};
}

}  // namespace fallcascade::data
