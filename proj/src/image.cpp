#include "metasr/image.hpp"

#include "metasr/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

namespace metasr {

ImageBuffer::ImageBuffer(int channels, int height, int width, double fill)
    : planes(static_cast<std::size_t>(channels), Plane<double>::Constant(height, width, fill)) {}

bool operator==(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) return false;
  for (int c = 0; c < a.channels(); ++c)
    if (a.planes[c] != b.planes[c]) return false;
  return true;
}

ImageBuffer quantize(const ImageBuffer& image) {
  ImageBuffer out = image;
  for (auto& plane : out.planes)
    plane = plane.unaryExpr([](double v) { return std::nearbyint(std::clamp(v, 0.0, 255.0)); });
  return out;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw ConfigurationError("cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&png);
    throw ConfigurationError("cannot decode PNG " + path.string() + ": " + png.message);
  }
  const int h = static_cast<int>(png.height), w = static_cast<int>(png.width);
  ImageBuffer image(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) image.planes[c](y, x) = pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c];
  return image;
}

void write_png(const std::filesystem::path& path, const ImageBuffer& image) {
  if (image.channels() != 3 || image.empty()) throw ContractViolation("write_png expects a non-empty RGB image");
  const ImageBuffer q = quantize(image);
  const int h = image.height(), w = image.width();
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<std::uint8_t>(q.planes[c](y, x));
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(w);
  png.height = static_cast<png_uint_32>(h);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw ConfigurationError("cannot write PNG " + path.string() + ": " + png.message);
  }
}

Tensor image_to_tensor(const ImageBuffer& image) {
  const int c = image.channels(), h = image.height(), w = image.width();
  Eigen::VectorXd values(static_cast<Eigen::Index>(c) * h * w);
  for (int k = 0; k < c; ++k)
    Eigen::Map<Plane<double>>(values.data() + static_cast<Eigen::Index>(k) * h * w, h, w) = image.planes[k] / 255.0;
  return Tensor({c, h, w}, std::move(values));
}

ImageBuffer tensor_to_image(const Tensor& tensor) {
  if (tensor.rank() != 3) throw ContractViolation("tensor_to_image expects [C,H,W]");
  const int c = tensor.dim(0), h = tensor.dim(1), w = tensor.dim(2);
  ImageBuffer image(c, h, w);
  for (int k = 0; k < c; ++k)
    image.planes[k] =
        Eigen::Map<const Plane<double>>(tensor.values().data() + static_cast<Eigen::Index>(k) * h * w, h, w) * 255.0;
  return image;
}

ImageBuffer crop(const ImageBuffer& image, int y0, int x0, int h, int w) {
  if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > image.height() || x0 + w > image.width()) {
    throw ContractViolation("crop window outside image");
  }
  ImageBuffer out;
  for (const auto& plane : image.planes) out.planes.push_back(plane.block(y0, x0, h, w));
  return out;
}

}  // namespace metasr
