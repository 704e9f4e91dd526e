#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fallcascade/cascade/config.hpp"

namespace fallcascade::cli {

struct Overrides {
  bool fast = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;  // dotted.key=value, value parsed as JSON when possible
};

// Defaults, then the file, then the fast profile, then --seed, then --set.
nlohmann::json resolve_config_json(const std::optional<std::filesystem::path>& path, const Overrides& overrides);
cascade::PipelineConfig resolve_config(const std::optional<std::filesystem::path>& path, const Overrides& overrides);

// Exit codes: 0 ok, 1 usage/config, 2 data, 3 training, 4 internal.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fallcascade::cli
