#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metasr {

/// Container shared by PCA bases and checkpoints: an 8-byte ASCII magic, a
/// little-endian u64 header length, the JSON header text, then the payload
/// as little-endian float64 values.
struct FramedFile {
  nlohmann::json header;
  std::vector<double> payload;
};

void write_framed(const std::filesystem::path& path, std::string_view magic, const FramedFile& file);
FramedFile read_framed(const std::filesystem::path& path, std::string_view magic);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::span<const double> values);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace metasr
