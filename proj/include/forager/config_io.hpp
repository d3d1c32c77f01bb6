// include/forager/config_io.hpp
//
// JSON form of ForagerConfig. Keys are the struct field names; every key is
// optional and falls back to the default, unknown keys are rejected.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "forager/engine.hpp"

namespace forager {

std::string config_to_json(const ForagerConfig& config, int indent = 2);
/// Throws ConfigError naming the offending field.
ForagerConfig config_from_json(std::string_view text);

ForagerConfig load_config(const std::filesystem::path& path);
void save_config(const ForagerConfig& config, const std::filesystem::path& path);

}  // namespace forager
