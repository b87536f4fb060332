#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace metasr::cli {

/// Provenance record written next to every artifact a command produces.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  nlohmann::json inputs = nlohmann::json::array();
  std::vector<std::string> outputs;
  nlohmann::json errors = nlohmann::json::array();

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path) { outputs.push_back(path.string()); }
  void add_error(const std::string& file, const std::string& message);
  bool ok() const { return errors.empty(); }
  void write(const std::filesystem::path& path) const;
};

}  // namespace metasr::cli
