#pragma once

#include "metasr/tensor.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace metasr {

template <typename Scalar>
using Plane = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Planar image with samples on the [0, 255] scale. Processing keeps full
/// double precision; quantize() produces storable 8-bit values.
struct ImageBuffer {
  std::vector<Plane<double>> planes;

  ImageBuffer() = default;
  ImageBuffer(int channels, int height, int width, double fill = 0.0);

  int channels() const { return static_cast<int>(planes.size()); }
  int height() const { return planes.empty() ? 0 : static_cast<int>(planes.front().rows()); }
  int width() const { return planes.empty() ? 0 : static_cast<int>(planes.front().cols()); }
  bool empty() const { return planes.empty() || height() == 0 || width() == 0; }
};

bool operator==(const ImageBuffer& a, const ImageBuffer& b);

/// Clamp to [0, 255] and round to the nearest integer.
ImageBuffer quantize(const ImageBuffer& image);

/// 8-bit RGB PNG. Grayscale and alpha inputs are converted to RGB.
ImageBuffer read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

/// [C,H,W] tensor with values scaled to [0, 1].
Tensor image_to_tensor(const ImageBuffer& image);
ImageBuffer tensor_to_image(const Tensor& tensor);

/// Region copy, [y0, y0+h) x [x0, x0+w).
ImageBuffer crop(const ImageBuffer& image, int y0, int x0, int h, int w);

}  // namespace metasr
