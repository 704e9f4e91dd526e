#include "fallcascade/data/skeleton.hpp"

#include <algorithm>

#include "fallcascade/error.hpp"

namespace fallcascade::data {

std::string_view to_string(FallClass c) { return kFallClassNames[static_cast<std::size_t>(c)]; }

std::optional<FallClass> fall_class_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kFallClassNames.size(); ++i) {
    if (kFallClassNames[i] == name) return static_cast<FallClass>(i);
  }
  return std::nullopt;
}

std::vector<std::string> fall_class_labels() {
  return {kFallClassNames.begin(), kFallClassNames.end()};
}

ActivityCatalog::ActivityCatalog(std::vector<Entry> entries) : entries_(std::move(entries)) {
  if (entries_.size() != kActivityCount) {
    throw ConfigError("activity catalog needs " + std::to_string(kActivityCount) + " entries, got " +
                      std::to_string(entries_.size()));
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.code < b.code; });
  std::array<int, kFallClassCount> seen{};
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].code != static_cast<int>(i) + 1) {
      throw ConfigError("activity catalog codes must be exactly 1.." + std::to_string(kActivityCount));
    }
    if (entries_[i].fall_class) ++seen[static_cast<std::size_t>(*entries_[i].fall_class)];
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (seen[c] != 1) {
      throw ConfigError("fall class " + std::string(kFallClassNames[c]) + " must map to exactly one activity code");
    }
  }
}

ActivityCatalog ActivityCatalog::up_fall() {
  return ActivityCatalog({
      {1, "falling forward using hands", FallClass::HF},
      {2, "falling forward using knees", FallClass::KF},
      {3, "falling backwards", FallClass::BF},
      {4, "falling sideward", FallClass::SF},
      {5, "falling sitting in empty chair", FallClass::SDF},
      {6, "walking", std::nullopt},
      {7, "standing", std::nullopt},
      {8, "sitting", std::nullopt},
      {9, "picking up an object", std::nullopt},
      {10, "jumping", std::nullopt},
      {11, "laying", std::nullopt},
  });
}

// [{"code": 1, "name": "...", "fall_class": "HF"}, ...]; fall_class null or absent for daily activities.
ActivityCatalog ActivityCatalog::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("activity_catalog must be an array");
  std::vector<Entry> entries;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("code") || !item["code"].is_number_integer()) {
      throw ConfigError("activity_catalog entries need an integer 'code'");
    }
    Entry e;
    e.code = item["code"].get<int>();
    e.name = item.value("name", "activity " + std::to_string(e.code));
    if (item.contains("fall_class") && !item["fall_class"].is_null()) {
      const auto name = item["fall_class"].get<std::string>();
      e.fall_class = fall_class_from_string(name);
      if (!e.fall_class) throw ConfigError("unknown fall class '" + name + "'");
    }
    entries.push_back(std::move(e));
  }
  return ActivityCatalog(std::move(entries));
}

nlohmann::json ActivityCatalog::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json item{{"code", e.code}, {"name", e.name}};
    item["fall_class"] = e.fall_class ? nlohmann::json(std::string(to_string(*e.fall_class))) : nlohmann::json();
    j.push_back(std::move(item));
  }
  return j;
}

const ActivityCatalog::Entry& ActivityCatalog::entry(int code) const {
  if (code < 1 || code > kActivityCount) throw DataError("unknown activity code " + std::to_string(code));
  return entries_[static_cast<std::size_t>(code - 1)];
}

ActivityLabel ActivityCatalog::label(int code) const { return {code, entry(code).fall_class}; }

std::vector<int> ActivityCatalog::fall_codes() const {
  std::vector<int> out;
  for (const auto& e : entries_) {
    if (e.fall_class) out.push_back(e.code);
  }
  std::sort(out.begin(), out.end(), [this](int a, int b) { return *entry(a).fall_class < *entry(b).fall_class; });
  return out;
}

std::vector<int> ActivityCatalog::no_fall_codes() const {
  std::vector<int> out;
  for (const auto& e : entries_) {
    if (!e.fall_class) out.push_back(e.code);
  }
  return out;
}

std::string Provenance::key() const {
  return "s" + std::to_string(subject_id) + "-t" + std::to_string(trial_id) + "-c" + std::to_string(camera_id) +
         "-f" + std::to_string(frame_id);
}

net::Matrix feature_matrix(const Dataset& samples) {
  net::Matrix m(static_cast<Eigen::Index>(samples.size()), kFeatureWidth);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (int k = 0; k < kFeatureWidth; ++k) m(static_cast<Eigen::Index>(i), k) = samples[i].values[static_cast<std::size_t>(k)];
  }
  return m;
}

std::vector<int> binary_labels(const Dataset& samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.binary_label);
  return out;
}

std::vector<int> fall_labels(const Dataset& samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.multi_label) throw DataError("sample " + s.provenance.key() + " has no fall class");
    out.push_back(*s.multi_label);
  }
  return out;
}

std::vector<int> activity_indices(const Dataset& samples, const ActivityCatalog& catalog) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(catalog.entry(s.activity_code).code - 1);
  return out;
}

}  // namespace fallcascade::data
