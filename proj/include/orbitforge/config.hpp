#pragma once
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "orbitforge/json_io.hpp"

namespace orbitforge {

// Thrown for malformed or unknown configuration content; line and column are 1-based.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

struct ExperimentConfig {
  std::string command;  // a theorem id, "nrange" or "moments"
  json model;           // operator JSON {kind, params[, entries]}; null when unused
  json params = json::object();
  std::optional<std::string> output_path;
  std::string output_format = "json";
  std::uint64_t seed = 1;
  bool operator==(const ExperimentConfig&) const = default;
};

// Key/value text with [model], [params] and [output] sections. Top-level keys: command, seed.
ExperimentConfig parse_config_ini(const std::string& text);
ExperimentConfig parse_config_json(const std::string& text);
// JSON when the first non-blank character is '{'.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

std::string to_ini(const ExperimentConfig& c);
json to_json(const ExperimentConfig& c);

// "0.5", "-0.2i", "0.1+0.3i", "1e-3-2e-3i"
cplx parse_complex(const std::string& s);

}  // namespace orbitforge
