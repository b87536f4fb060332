#include "metasr/io.hpp"

#include "metasr/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>

namespace metasr {

static_assert(std::endian::native == std::endian::little, "framed files assume a little-endian host");

void write_framed(const std::filesystem::path& path, std::string_view magic, const FramedFile& file) {
  if (magic.size() != 8) throw ContractViolation("framed file magic must be 8 bytes");
  const std::string header = file.header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  const std::uint64_t length = header.size();
  out.write(magic.data(), 8);
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(file.payload.data()),
            static_cast<std::streamsize>(file.payload.size() * sizeof(double)));
  if (!out) throw ConfigurationError("short write to " + path.string());
}

FramedFile read_framed(const std::filesystem::path& path, std::string_view magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path.string());
  std::array<char, 8> tag{};
  std::uint64_t length = 0;
  in.read(tag.data(), 8);
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || std::string_view(tag.data(), 8) != magic) {
    throw ConfigurationError(path.string() + ": not a " + std::string(magic) + " file");
  }
  const std::uint64_t total = std::filesystem::file_size(path);
  if (length > total - 16) throw ConfigurationError(path.string() + ": header length exceeds file size");
  std::string header(length, '\0');
  in.read(header.data(), static_cast<std::streamsize>(length));
  std::vector<char> rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (rest.size() != total - 16 - length || rest.size() % sizeof(double) != 0) {
    throw ConfigurationError(path.string() + ": truncated payload");
  }
  FramedFile file;
  try {
    file.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(path.string() + ": bad header: " + e.what());
  }
  file.payload.resize(rest.size() / sizeof(double));
  std::memcpy(file.payload.data(), rest.data(), rest.size());
  return file;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &size) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < size; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

std::string sha256_hex(std::span<const double> values) {
  return sha256_hex(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(values.data()), values.size_bytes()));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(std::span<const std::uint8_t>(bytes));
}

}  // namespace metasr
