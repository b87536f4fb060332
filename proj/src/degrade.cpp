#include "metasr/degrade.hpp"

#include "metasr/error.hpp"
#include "metasr/nn.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace metasr {

bool has_blur(Protocol p) { return p != Protocol::CompressOnly; }
bool has_compression(Protocol p) { return p != Protocol::BlurOnly; }

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::BlurOnly: return "blur";
    case Protocol::BlurCompress: return "blur+compress";
    case Protocol::CompressOnly: return "compress";
  }
  return "blur";
}

Protocol parse_protocol(const std::string& name) {
  if (name == "blur" || name == "blur-only") return Protocol::BlurOnly;
  if (name == "blur+compress") return Protocol::BlurCompress;
  if (name == "compress" || name == "compress-only") return Protocol::CompressOnly;
  throw ConfigurationError("unknown protocol '" + name + "' (expected blur, blur+compress or compress)");
}

BlurKernel gaussian_kernel(double sigma, int size) {
  if (!(sigma > 0.0)) throw ConfigurationError("gaussian_kernel: sigma must be positive");
  if (size < 1 || size % 2 == 0) throw ConfigurationError("gaussian_kernel: size must be odd");
  const int c = size / 2;
  BlurKernel k;
  k.width = sigma;
  k.values.resize(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const int d2 = (i - c) * (i - c) + (j - c) * (j - c);
      k.values(i, j) = std::exp(-static_cast<double>(d2) / (2.0 * sigma * sigma));
    }
  k.values /= k.values.sum();
  return k;
}

ImageBuffer blur(const ImageBuffer& image, const BlurKernel& kernel) {
  if (image.empty()) throw ContractViolation("blur: empty image");
  const int h = image.height(), w = image.width();
  const int ks = kernel.size(), r = ks / 2;
  ImageBuffer out(image.channels(), h, w);
  for (int ch = 0; ch < image.channels(); ++ch) {
    // Replicate-pad once, then every output pixel is a dense window dot product.
    Plane<double> padded(h + 2 * r, w + 2 * r);
    for (int y = 0; y < h + 2 * r; ++y)
      for (int x = 0; x < w + 2 * r; ++x)
        padded(y, x) = image.planes[ch](std::clamp(y - r, 0, h - 1), std::clamp(x - r, 0, w - 1));
    auto& dst = out.planes[ch];
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) dst(y, x) = padded.block(y, x, ks, ks).cwiseProduct(kernel.values).sum();
  }
  return out;
}

int resized_extent(int extent, Scale scale) {
  if (scale.num <= 0 || scale.den <= 0) throw ConfigurationError("resize scale must be positive");
  const std::int64_t n = static_cast<std::int64_t>(extent) * scale.num;
  return static_cast<int>((n + scale.den - 1) / scale.den);
}

namespace {

double cubic(double x) {
  const double a = std::abs(x), a2 = a * a, a3 = a2 * a;
  if (a <= 1.0) return 1.5 * a3 - 2.5 * a2 + 1.0;
  if (a <= 2.0) return -0.5 * a3 + 2.5 * a2 - 4.0 * a + 2.0;
  return 0.0;
}

// Sparse resampling matrix for one axis: out = M * in.
struct AxisWeights {
  std::vector<std::vector<std::pair<int, double>>> taps;
};

AxisWeights axis_weights(int in, int out, double scale) {
  const bool shrink = scale < 1.0;
  const double width = shrink ? 4.0 / scale : 4.0;
  const int taps = static_cast<int>(std::ceil(width)) + 2;
  AxisWeights aw;
  aw.taps.resize(out);
  for (int i = 0; i < out; ++i) {
    // 1-based continuous source coordinate of output sample i+1.
    const double u = (i + 1) / scale + 0.5 * (1.0 - 1.0 / scale);
    const int left = static_cast<int>(std::floor(u - width / 2.0));
    std::vector<std::pair<int, double>> row;
    double total = 0.0;
    for (int t = 0; t < taps; ++t) {
      const int idx = left + t;
      const double d = u - idx;
      const double wgt = shrink ? scale * cubic(scale * d) : cubic(d);
      if (wgt == 0.0) continue;
      // Mirror 1-based index into [1, in] (edge sample repeated).
      int m = idx - 1;
      const int period = 2 * in;
      m = ((m % period) + period) % period;
      if (m >= in) m = period - 1 - m;
      row.emplace_back(m, wgt);
      total += wgt;
    }
    for (auto& [idx, wgt] : row) wgt /= total;
    aw.taps[i] = std::move(row);
  }
  return aw;
}

}  // namespace

ImageBuffer bicubic_resize(const ImageBuffer& image, Scale scale) {
  if (image.empty()) throw ContractViolation("bicubic_resize: empty image");
  const int h = image.height(), w = image.width();
  const int oh = resized_extent(h, scale), ow = resized_extent(w, scale);
  if (oh < 1 || ow < 1) throw ConfigurationError("bicubic_resize: degenerate output size");
  if (scale.num == scale.den) return image;
  const double s = scale.value();
  const AxisWeights rows = axis_weights(h, oh, s);
  const AxisWeights cols = axis_weights(w, ow, s);

  ImageBuffer out(image.channels(), oh, ow);
  for (int ch = 0; ch < image.channels(); ++ch) {
    const auto& src = image.planes[ch];
    Plane<double> tmp(oh, w);
    for (int y = 0; y < oh; ++y) {
      tmp.row(y).setZero();
      for (const auto& [iy, wy] : rows.taps[y]) tmp.row(y) += wy * src.row(iy);
    }
    auto& dst = out.planes[ch];
    for (int x = 0; x < ow; ++x) {
      dst.col(x).setZero();
      for (const auto& [ix, wx] : cols.taps[x]) dst.col(x) += wx * tmp.col(ix);
    }
  }
  return out;
}

double qp_step(int qpi) { return std::exp2((qpi - 4) / 6.0); }

namespace {

Eigen::Matrix<double, 8, 8> dct_matrix() {
  Eigen::Matrix<double, 8, 8> d;
  for (int k = 0; k < 8; ++k)
    for (int n = 0; n < 8; ++n) {
      const double alpha = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      d(k, n) = alpha * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
    }
  return d;
}

Eigen::Matrix3d rgb_to_ycbcr_matrix() {
  Eigen::Matrix3d m;
  m << 0.299, 0.587, 0.114, -0.168736, -0.331264, 0.5, 0.5, -0.418688, -0.081312;
  return m;
}

}  // namespace

ImageBuffer compress_dct(const ImageBuffer& image, int qpi) {
  if (qpi < kQpiMin || qpi > kQpiMax) {
    throw ConfigurationError("compress_dct: QPI " + std::to_string(qpi) + " outside [20, 40]");
  }
  if (image.channels() != 3 || image.empty()) throw ContractViolation("compress_dct expects a non-empty RGB image");
  const int h = image.height(), w = image.width();
  const int ph = (h + 7) / 8 * 8, pw = (w + 7) / 8 * 8;
  const double step = qp_step(qpi);
  static const Eigen::Matrix<double, 8, 8> D = dct_matrix();
  static const Eigen::Matrix3d to_ycc = rgb_to_ycbcr_matrix();
  static const Eigen::Matrix3d to_rgb = to_ycc.inverse();
  const Eigen::Vector3d offset(0.0, 128.0, 128.0);

  std::vector<Plane<double>> ycc(3, Plane<double>(ph, pw));
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) {
      const int sy = std::min(y, h - 1), sx = std::min(x, w - 1);
      const Eigen::Vector3d rgb(image.planes[0](sy, sx), image.planes[1](sy, sx), image.planes[2](sy, sx));
      const Eigen::Vector3d v = to_ycc * rgb + offset;
      for (int c = 0; c < 3; ++c) ycc[c](y, x) = v[c];
    }

  for (auto& plane : ycc)
    for (int by = 0; by < ph; by += 8)
      for (int bx = 0; bx < pw; bx += 8) {
        Eigen::Matrix<double, 8, 8> coef = D * plane.block<8, 8>(by, bx) * D.transpose();
        const double dc = coef(0, 0);
        coef = (coef / step).array().round() * step;
        coef(0, 0) = dc;
        plane.block<8, 8>(by, bx) = D.transpose() * coef * D;
      }

  ImageBuffer out(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d v(ycc[0](y, x), ycc[1](y, x), ycc[2](y, x));
      const Eigen::Vector3d rgb = to_rgb * (v - offset);
      for (int c = 0; c < 3; ++c) out.planes[c](y, x) = rgb[c];
    }
  return quantize(out);
}

void DegradationRecord::validate() const {
  if (scale < 1) throw ConfigurationError("degradation scale must be >= 1");
  if (has_blur(protocol) != sigma.has_value()) {
    throw ConfigurationError("record for '" + source + "': sigma must be present iff the protocol blurs");
  }
  if (sigma && (*sigma < kSigmaMin || *sigma > kSigmaMax)) {
    throw ConfigurationError("record for '" + source + "': sigma outside [0.2, 4]");
  }
  if (has_compression(protocol) != qpi.has_value()) {
    throw ConfigurationError("record for '" + source + "': qpi must be present iff the protocol compresses");
  }
  if (qpi && (*qpi < kQpiMin || *qpi > kQpiMax)) {
    throw ConfigurationError("record for '" + source + "': qpi outside [20, 40]");
  }
}

bool operator==(const DegradationRecord& a, const DegradationRecord& b) {
  return a.source == b.source && a.sigma == b.sigma && a.scale == b.scale && a.qpi == b.qpi && a.seed == b.seed &&
         a.protocol == b.protocol;
}

void to_json(nlohmann::json& j, const DegradationRecord& r) {
  j = nlohmann::json::object();
  j["source"] = r.source;
  j["sigma"] = r.sigma ? nlohmann::json(*r.sigma) : nlohmann::json(nullptr);
  j["scale"] = r.scale;
  j["qpi"] = r.qpi ? nlohmann::json(*r.qpi) : nlohmann::json(nullptr);
  j["seed"] = r.seed;
  j["protocol"] = protocol_name(r.protocol);
}

void from_json(const nlohmann::json& j, DegradationRecord& r) {
  r.source = j.at("source").get<std::string>();
  r.sigma = j.at("sigma").is_null() ? std::nullopt : std::optional<double>(j.at("sigma").get<double>());
  r.scale = j.at("scale").get<int>();
  r.qpi = j.at("qpi").is_null() ? std::nullopt : std::optional<int>(j.at("qpi").get<int>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.protocol = parse_protocol(j.at("protocol").get<std::string>());
}

ImageBuffer modcrop(const ImageBuffer& image, int scale) {
  if (scale < 1) throw ConfigurationError("modcrop: scale must be >= 1");
  const int h = image.height() / scale * scale, w = image.width() / scale * scale;
  if (h == 0 || w == 0) throw ConfigurationError("image smaller than the scale factor");
  if (h == image.height() && w == image.width()) return image;
  return crop(image, 0, 0, h, w);
}

std::pair<ImageBuffer, DegradationRecord> degrade_image(const ImageBuffer& image, const DegradationRecord& record) {
  record.validate();
  ImageBuffer lr = modcrop(image, record.scale);
  if (record.sigma) lr = blur(lr, gaussian_kernel(*record.sigma));
  lr = quantize(bicubic_resize(lr, Scale{1, record.scale}));
  if (record.qpi) lr = compress_dct(lr, *record.qpi);
  return {std::move(lr), record};
}

std::vector<DegradationRecord> draw_records(const std::vector<std::string>& sources, Protocol protocol, int scale,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DegradationRecord> records;
  records.reserve(sources.size());
  for (const auto& source : sources) {
    DegradationRecord r;
    r.source = source;
    r.scale = scale;
    r.protocol = protocol;
    // Fixed draw order per image: sigma, qpi, seed.
    const double u = uniform01(rng);
    const std::uint64_t q = rng();
    r.seed = rng();
    if (has_blur(protocol)) r.sigma = kSigmaMin + (kSigmaMax - kSigmaMin) * u;
    if (has_compression(protocol)) r.qpi = kQpiMin + static_cast<int>(q % (kQpiMax - kQpiMin + 1));
    records.push_back(std::move(r));
  }
  return records;
}

void write_sidecar(const std::filesystem::path& path, const std::vector<DegradationRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write sidecar " + path.string());
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

std::vector<DegradationRecord> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read sidecar " + path.string());
  std::vector<DegradationRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line).get<DegradationRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigurationError("malformed sidecar line in " + path.string() + ": " + e.what());
    }
  }
  return records;
}

}  // namespace metasr
