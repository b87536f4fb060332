#include "metasr/metrics.hpp"

#include <cstdio>
#include <fstream>

namespace metasr {

std::string color_name(ColorMode mode) { return mode == ColorMode::Luma ? "luma" : "rgb"; }

ColorMode parse_color(const std::string& name) {
  if (name == "luma" || name == "y") return ColorMode::Luma;
  if (name == "rgb") return ColorMode::Rgb;
  throw ConfigurationError("unknown color mode '" + name + "' (expected luma or rgb)");
}

Plane<double> rgb_to_y(const ImageBuffer& image) {
  if (image.channels() != 3) throw ContractViolation("rgb_to_y expects three channels");
  return ((65.481 * image.planes[0] + 128.553 * image.planes[1] + 24.966 * image.planes[2]) / 255.0).array() + 16.0;
}

double psnr(const ImageBuffer& a, const ImageBuffer& b, int crop) {
  if (a.channels() != b.channels()) throw ContractViolation("metric inputs differ in channel count");
  double total = 0.0;
  for (int c = 0; c < a.channels(); ++c) total += mse(a.planes[c], b.planes[c], crop);
  return psnr_from_mse(total / a.channels());
}

Plane<double> ssim_window() {
  Plane<double> w(11, 11);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) w(i, j) = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
  return w / w.sum();
}

PairMetrics evaluate_pair(const ImageBuffer& sr, const ImageBuffer& hr, int crop, ColorMode mode) {
  if (sr.channels() != hr.channels() || sr.height() != hr.height() || sr.width() != hr.width()) {
    throw ContractViolation("evaluate_pair: image sizes differ");
  }
  detail::check_crop(hr.height(), hr.width(), crop);
  const int h = hr.height() - 2 * crop, w = hr.width() - 2 * crop;
  PairMetrics m;
  if (mode == ColorMode::Luma) {
    const Plane<double> ys = rgb_to_y(sr), yh = rgb_to_y(hr);
    m.psnr = psnr(ys, yh, crop);
    m.ssim = ssim(ys.block(crop, crop, h, w), yh.block(crop, crop, h, w));
  } else {
    m.psnr = psnr(sr, hr, crop);
    for (int c = 0; c < hr.channels(); ++c)
      m.ssim += ssim(sr.planes[c].block(crop, crop, h, w), hr.planes[c].block(crop, crop, h, w));
    m.ssim /= hr.channels();
  }
  return m;
}

double MetricReport::mean_psnr() const {
  double total = 0.0;
  for (const auto& im : images) total += im.psnr;
  return images.empty() ? 0.0 : total / static_cast<double>(images.size());
}

double MetricReport::mean_ssim() const {
  double total = 0.0;
  for (const auto& im : images) total += im.ssim;
  return images.empty() ? 0.0 : total / static_cast<double>(images.size());
}

std::string format_metric(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_report_csv(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write report " + path.string());
  out << "model,params,dataset,image,psnr,ssim,crop,color\n";
  auto row = [&](const std::string& image, double p, double s) {
    out << report.model << ',' << report.params << ',' << report.dataset << ',' << image << ',' << format_metric(p)
        << ',' << format_metric(s) << ',' << report.crop << ',' << color_name(report.color) << '\n';
  };
  for (const auto& im : report.images) row(im.image, im.psnr, im.ssim);
  row("mean", report.mean_psnr(), report.mean_ssim());
}

}  // namespace metasr
