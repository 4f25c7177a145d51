#pragma once

// Run configuration files: either a JSON object or `key = value` lines
// (`#` starts a comment). Keys are long option names without dashes.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace qkdlab {

using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::filesystem::path& path);

}  // namespace qkdlab
