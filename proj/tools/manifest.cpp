#include "manifest.hpp"

#include "metasr/error.hpp"
#include "metasr/io.hpp"

#include <fstream>
#include <iostream>

#ifndef METASR_VERSION
#define METASR_VERSION "unknown"
#endif

namespace metasr::cli {

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_error(const std::string& file, const std::string& message) {
  std::cerr << "error: " << file << ": " << message << '\n';
  errors.push_back({{"file", file}, {"message", message}});
}

void RunManifest::write(const std::filesystem::path& path) const {
  const nlohmann::json j = {{"command", command}, {"tool_version", METASR_VERSION},
                            {"seed", seed},       {"config", config},
                            {"inputs", inputs},   {"outputs", outputs},
                            {"errors", errors}};
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace metasr::cli
