#pragma once

#include "metasr/error.hpp"
#include "metasr/image.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

namespace metasr {

enum class ColorMode { Luma, Rgb };

std::string color_name(ColorMode mode);
ColorMode parse_color(const std::string& name);

/// BT.601 studio-range luma: 16 + (65.481 R + 128.553 G + 24.966 B) / 255.
Plane<double> rgb_to_y(const ImageBuffer& image);

/// Value reported for identical inputs.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_crop(Eigen::Index rows, Eigen::Index cols, int crop) {
  if (crop < 0 || 2 * static_cast<Eigen::Index>(crop) >= rows || 2 * static_cast<Eigen::Index>(crop) >= cols) {
    throw ContractViolation("crop border " + std::to_string(crop) + " leaves no pixels");
  }
}

}  // namespace detail

/// Mean squared error over the border-cropped region.
template <typename DerivedA, typename DerivedB>
double mse(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, int crop = 0) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ContractViolation("metric inputs differ in shape");
  detail::check_crop(a.rows(), a.cols(), crop);
  const Eigen::Index h = a.rows() - 2 * crop, w = a.cols() - 2 * crop;
  const auto diff = (a.block(crop, crop, h, w).template cast<double>() -
                     b.block(crop, crop, h, w).template cast<double>())
                        .eval();
  return diff.squaredNorm() / static_cast<double>(h * w);
}

inline double psnr_from_mse(double mse_value) {
  if (mse_value == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

template <typename DerivedA, typename DerivedB>
double psnr(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, int crop = 0) {
  return psnr_from_mse(mse(a, b, crop));
}

/// Over every channel jointly.
double psnr(const ImageBuffer& a, const ImageBuffer& b, int crop = 0);

/// 11x11 Gaussian window, sigma 1.5, normalised to sum one.
Plane<double> ssim_window();

/// Mean of the local SSIM map over all full-window positions, with
/// K1 = 0.01, K2 = 0.03, L = 255.
template <typename DerivedA, typename DerivedB>
double ssim(const Eigen::MatrixBase<DerivedA>& a_in, const Eigen::MatrixBase<DerivedB>& b_in) {
  if (a_in.rows() != b_in.rows() || a_in.cols() != b_in.cols()) {
    throw ContractViolation("metric inputs differ in shape");
  }
  if (a_in.rows() < 11 || a_in.cols() < 11) throw ConfigurationError("ssim needs inputs of at least 11x11");
  const Plane<double> a = a_in.template cast<double>();
  const Plane<double> b = b_in.template cast<double>();
  static const Plane<double> window = ssim_window();
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const Eigen::Index oh = a.rows() - 10, ow = a.cols() - 10;
  const Plane<double> aa = a.cwiseProduct(a), bb = b.cwiseProduct(b), ab = a.cwiseProduct(b);
  double total = 0.0;
  for (Eigen::Index y = 0; y < oh; ++y)
    for (Eigen::Index x = 0; x < ow; ++x) {
      const double mu_a = a.block<11, 11>(y, x).cwiseProduct(window).sum();
      const double mu_b = b.block<11, 11>(y, x).cwiseProduct(window).sum();
      const double var_a = aa.block<11, 11>(y, x).cwiseProduct(window).sum() - mu_a * mu_a;
      const double var_b = bb.block<11, 11>(y, x).cwiseProduct(window).sum() - mu_b * mu_b;
      const double cov = ab.block<11, 11>(y, x).cwiseProduct(window).sum() - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  return total / static_cast<double>(oh * ow);
}

struct PairMetrics {
  double psnr = 0.0;
  double ssim = 0.0;
};

/// PSNR and SSIM of `sr` against `hr` after cropping `crop` pixels from every
/// border, on luma or averaged over RGB channels.
PairMetrics evaluate_pair(const ImageBuffer& sr, const ImageBuffer& hr, int crop, ColorMode mode);

struct ImageMetrics {
  std::string image;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::string model;
  std::int64_t params = 0;  // 0 for parameter-free baselines
  std::string dataset;
  int crop = 0;
  ColorMode color = ColorMode::Luma;
  std::vector<ImageMetrics> images;

  double mean_psnr() const;
  double mean_ssim() const;
};

/// Columns: model,params,dataset,image,psnr,ssim,crop,color. One row per
/// image, then a row with image = "mean".
void write_report_csv(const std::filesystem::path& path, const MetricReport& report);
std::string format_metric(double value);

}  // namespace metasr
