#pragma once

#include "flame/sampler/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace flame::io {

/// Flat TOML subset: `key = value` lines with strings, integers, floats and
/// booleans, `#` comments, and at most a `[flame]` table header. Anything
/// else is a ParseError naming the line.
nlohmann::json parse_flat_toml(const std::string& text);

/// Reads a JSON or TOML config (chosen by a .toml extension, else JSON),
/// applies it over the defaults and validates. ConfigError / ParseError.
sampler::FlameConfig load_config(const std::filesystem::path& path);

}  // namespace flame::io
