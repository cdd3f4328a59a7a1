#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "eyevis/residue.hpp"

namespace eyevis {

enum class ProviderKind { kFixture, kExternal };

struct AppConfig {
  VisionConfig vision;
  std::filesystem::path data_dir = "eyevis-data";
  int port = 8080;
  std::string host = "127.0.0.1";
  ProviderKind provider = ProviderKind::kFixture;
  std::optional<std::filesystem::path> landmarks_dir;
  std::string external_command;
  int workers = 4;
};

// Overrides only the fields present in `json_text`. Unknown keys are rejected
// so typos do not silently fall back to defaults.
void apply_config_json(AppConfig& cfg, const std::string& json_text);
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);
// EYEVIS_DATA_DIR and EYEVIS_PORT, read from `env` (tests pass a map; the
// CLI passes the process environment).
void apply_config_env(AppConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_env();

std::string config_to_json(const AppConfig& cfg);

ProviderKind parse_provider_kind(const std::string& name);

}  // namespace eyevis
