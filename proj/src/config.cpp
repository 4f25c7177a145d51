#include "qkdlab/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qkdlab/errors.hpp"

namespace qkdlab {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

ConfigMap parse_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config: JSON config must be an object");
  ConfigMap out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string())
      out[key] = value.get<std::string>();
    else if (value.is_boolean() || value.is_number())
      out[key] = value.dump();
    else
      throw DomainError("config: value of '" + key + "' must be a string, number or boolean");
  }
  return out;
}

}  // namespace

ConfigMap parse_config(std::string_view text) {
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') return parse_json(body);

  ConfigMap out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError("config line " + std::to_string(number) + ": expected key = value");
    auto key = trim(std::string_view(line).substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (key.empty()) throw DomainError("config line " + std::to_string(number) + ": empty key");
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace qkdlab
