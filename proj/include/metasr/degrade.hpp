#pragma once

// LR synthesis: blur -> bicubic downscale -> optional block-DCT compression.

#include "metasr/image.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace metasr {

inline constexpr int kKernelSize = 21;
inline constexpr double kSigmaMin = 0.2;
inline constexpr double kSigmaMax = 4.0;
inline constexpr int kQpiMin = 20;
inline constexpr int kQpiMax = 40;

enum class Protocol { BlurOnly, BlurCompress, CompressOnly };

bool has_blur(Protocol p);
bool has_compression(Protocol p);
/// Canonical names: "blur", "blur+compress", "compress".
std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

struct BlurKernel {
  double width = 0.0;    // sigma
  Plane<double> values;  // size x size, sums to one

  int size() const { return static_cast<int>(values.rows()); }
  Eigen::Map<const Eigen::VectorXd> flat() const { return {values.data(), values.size()}; }
};

BlurKernel gaussian_kernel(double sigma, int size = kKernelSize);

/// Per-channel 2-D convolution with edge-replicate borders; same size out.
ImageBuffer blur(const ImageBuffer& image, const BlurKernel& kernel);

/// Positive rational resize factor, num/den.
struct Scale {
  int num = 1;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

/// Output extent for resizing `extent` samples by `scale`: ceil(extent * num / den).
int resized_extent(int extent, Scale scale);

/// Cubic convolution (a = -0.5) with kernel stretching when shrinking and
/// mirrored borders; the imresize convention used across SR benchmarks.
ImageBuffer bicubic_resize(const ImageBuffer& image, Scale scale);

/// Quantisation step for a QP on the H.264 scale.
double qp_step(int qpi);

/// Block-DCT compression stand-in. YCbCr planes are split into 8x8 blocks;
/// AC coefficients are quantised with step qp_step(qpi) while the DC term
/// is carried exactly (flat regions survive, as under intra DC
/// prediction). Output is clamped and rounded to 8 bits.
ImageBuffer compress_dct(const ImageBuffer& image, int qpi);

struct DegradationRecord {
  std::string source;
  std::optional<double> sigma;
  int scale = 4;
  std::optional<int> qpi;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::BlurOnly;

  /// Throws ConfigurationError when fields disagree with the protocol.
  void validate() const;
};

bool operator==(const DegradationRecord& a, const DegradationRecord& b);

void to_json(nlohmann::json& j, const DegradationRecord& r);
void from_json(const nlohmann::json& j, DegradationRecord& r);

/// Top-left crop to the largest multiple of `scale` in each dimension.
ImageBuffer modcrop(const ImageBuffer& image, int scale);

/// modcrop -> blur -> downscale by 1/scale -> 8-bit -> compress, skipping
/// stages the protocol leaves out. Pure in (image, record).
std::pair<ImageBuffer, DegradationRecord> degrade_image(const ImageBuffer& image, const DegradationRecord& record);

/// Draws sigma ~ U[0.2, 4] and QPI ~ U{20..40} per source, sequentially from
/// one generator seeded with `seed`, plus a per-image provenance seed.
std::vector<DegradationRecord> draw_records(const std::vector<std::string>& sources, Protocol protocol, int scale,
                                            std::uint64_t seed);

/// JSON-lines sidecar, one record per line.
void write_sidecar(const std::filesystem::path& path, const std::vector<DegradationRecord>& records);
std::vector<DegradationRecord> read_sidecar(const std::filesystem::path& path);

}  // namespace metasr
