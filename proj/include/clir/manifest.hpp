#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace clir {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance of one CLI run. Nothing time- or host-dependent is recorded, so
/// identical inputs give byte-identical manifests.
struct Manifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config;     // effective options in config-file syntax, replayable with --config
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;  // role, path
  std::vector<std::filesystem::path> outputs;

  nlohmann::json to_json() const;
};

/// Writes manifest.json into `dir`, digesting every input and output file.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

}  // namespace clir
