#pragma once

#include <filesystem>

#include "json.hpp"

#include "fallcascade/net/network.hpp"

namespace fallcascade::net {

inline constexpr int kModelFormatVersion = 1;

// {format_version, input_width, class_count, head_weights, layers: [{kind, width, ...params}]}
// Parameter arrays are row-major; doubles are written in shortest round-trip form.
nlohmann::json model_to_json(const Network& net);

// Loaded networks are in infer mode. Errors name the offending field.
Network model_from_json(const nlohmann::json& doc);

void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace fallcascade::net
