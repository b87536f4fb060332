#include "metasr/synth.hpp"

#include "metasr/error.hpp"
#include "metasr/nn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace metasr {

namespace {

using Color = std::array<double, 3>;

Color random_color(std::mt19937_64& rng) {
  return {255.0 * uniform01(rng), 255.0 * uniform01(rng), 255.0 * uniform01(rng)};
}

}  // namespace

ImageBuffer synthetic_scene(int height, int width, std::uint64_t seed) {
  if (height < 1 || width < 1) throw ConfigurationError("synthetic_scene: empty size");
  std::mt19937_64 rng(seed);
  ImageBuffer img(3, height, width);

  const Color c0 = random_color(rng), c1 = random_color(rng);
  const double angle = 2.0 * std::numbers::pi * uniform01(rng);
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double span = std::abs(dx) * width + std::abs(dy) * height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = std::clamp(0.5 + (dx * (x - width / 2.0) + dy * (y - height / 2.0)) / span, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) img.planes[c](y, x) = (1.0 - t) * c0[c] + t * c1[c];
    }

  const int shapes = 12 + static_cast<int>(rng() % 16);
  const double extent = std::min(height, width);
  for (int s = 0; s < shapes; ++s) {
    const bool ellipse = (rng() % 2) == 0;
    const int fill = static_cast<int>(rng() % 3);  // 0 flat, 1 shaded, 2 striped
    const double cy = height * uniform01(rng), cx = width * uniform01(rng);
    const double ry = extent * (0.03 + 0.22 * uniform01(rng)), rx = extent * (0.03 + 0.22 * uniform01(rng));
    const double rot = std::numbers::pi * uniform01(rng);
    const Color a = random_color(rng), b = random_color(rng);
    const double freq = 2.0 * std::numbers::pi / (3.0 + 14.0 * uniform01(rng));
    const double cr = std::cos(rot), sr = std::sin(rot);
    const int y0 = std::max(0, static_cast<int>(cy - std::max(rx, ry)) - 1);
    const int y1 = std::min(height - 1, static_cast<int>(cy + std::max(rx, ry)) + 1);
    const int x0 = std::max(0, static_cast<int>(cx - std::max(rx, ry)) - 1);
    const int x1 = std::min(width - 1, static_cast<int>(cx + std::max(rx, ry)) + 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double u = ((x - cx) * cr + (y - cy) * sr) / rx;
        const double v = (-(x - cx) * sr + (y - cy) * cr) / ry;
        const bool inside = ellipse ? (u * u + v * v <= 1.0) : (std::abs(u) <= 1.0 && std::abs(v) <= 1.0);
        if (!inside) continue;
        double t = 0.0;
        if (fill == 1) t = std::clamp(0.5 * (u + 1.0), 0.0, 1.0);
        if (fill == 2) t = 0.5 + 0.5 * std::sin(freq * (u * rx));
        for (int c = 0; c < 3; ++c) img.planes[c](y, x) = (1.0 - t) * a[c] + t * b[c];
      }
  }

  for (auto& plane : img.planes)
    for (Eigen::Index i = 0; i < plane.size(); ++i) plane.data()[i] += 6.0 * (uniform01(rng) - 0.5);
  return quantize(img);
}

}  // namespace metasr
