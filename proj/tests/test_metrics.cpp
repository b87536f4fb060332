#include "metasr/error.hpp"
#include "metasr/metrics.hpp"
#include "metasr/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace metasr;

namespace {

Plane<double> random_plane(int h, int w, std::mt19937_64& rng) {
  Plane<double> p(h, w);
  for (auto& v : p.reshaped()) v = std::floor(oracle::uniform(rng, 0.0, 256.0));
  return p;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("studio-range luma endpoints") {
  auto y_of = [](double r, double g, double b) {
    ImageBuffer px(3, 1, 1);
    px.planes[0](0, 0) = r;
    px.planes[1](0, 0) = g;
    px.planes[2](0, 0) = b;
    return rgb_to_y(px)(0, 0);
  };
  CHECK(y_of(255, 255, 255) == doctest::Approx(235.0).epsilon(1e-14));
  CHECK(y_of(0, 0, 0) == 16.0);
  CHECK(y_of(255, 0, 0) == doctest::Approx(81.481).epsilon(1e-14));
}

TEST_CASE("PSNR closed forms") {
  const Plane<double> a = Plane<double>::Constant(8, 8, 100.0);
  CHECK(psnr(a, a) == kPsnrIdentical);
  CHECK(psnr(Plane<double>::Zero(8, 8), Plane<double>::Constant(8, 8, 255.0)) == doctest::Approx(0.0));
  const double p16 = psnr(a, Plane<double>(a.array() + 16.0));
  CHECK(std::abs(p16 - 20.0 * std::log10(255.0 / 16.0)) < 1e-9);
  CHECK(p16 == doctest::Approx(24.0483).epsilon(1e-5));
  CHECK_THROWS_AS(psnr(a, Plane<double>::Zero(8, 9)), ContractViolation);
  CHECK_THROWS_AS(psnr(a, a, 4), ContractViolation);
}

TEST_CASE("PSNR only looks inside the crop border") {
  Plane<double> a = Plane<double>::Constant(10, 10, 50.0), b = a;
  b.row(0).setConstant(0.0);
  b.col(9).setConstant(0.0);
  CHECK(psnr(a, b, 1) == kPsnrIdentical);
  CHECK(psnr(a, b, 0) < 30.0);
}

TEST_CASE("PSNR strictly decreases with a growing offset") {
  const Plane<double> a = Plane<double>::Constant(12, 12, 100.0);
  double previous = kPsnrIdentical;
  for (int d = 1; d <= 100; ++d) {
    const double p = psnr(a, Plane<double>(a.array() + d));
    CHECK(p < previous);
    previous = p;
  }
}

TEST_CASE("SSIM identity, symmetry, flips and the definition oracle") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const Plane<double> a = random_plane(32, 32, rng);
    Plane<double> b = a;
    for (auto& v : b.reshaped()) v = std::clamp(v + std::round(oracle::uniform(rng, -30, 30)), 0.0, 255.0);
    CHECK(std::abs(ssim(a, a) - 1.0) <= 1e-12);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
    CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) <= 1e-9);
    const Plane<double> fa = a.rowwise().reverse(), fb = b.rowwise().reverse();
    CHECK(ssim(fa, fb) == doctest::Approx(ssim(a, b)).epsilon(1e-12));
    const Plane<double> va = a.colwise().reverse(), vb = b.colwise().reverse();
    CHECK(ssim(va, vb) == doctest::Approx(ssim(a, b)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ssim(Plane<double>::Zero(10, 20), Plane<double>::Zero(10, 20)), ConfigurationError);
}

TEST_CASE("evaluate_pair on luma and RGB") {
  const ImageBuffer hr = synthetic_scene(40, 40, 1);
  const PairMetrics same = evaluate_pair(hr, hr, 4, ColorMode::Luma);
  CHECK(same.psnr == kPsnrIdentical);
  CHECK(std::abs(same.ssim - 1.0) <= 1e-12);
  ImageBuffer noisy = hr;
  noisy.planes[1].array() += 3.0;
  const PairMetrics rgb = evaluate_pair(noisy, hr, 0, ColorMode::Rgb);
  CHECK(rgb.psnr == doctest::Approx(10 * std::log10(255.0 * 255.0 / 3.0)).epsilon(1e-12));
  const PairMetrics luma = evaluate_pair(noisy, hr, 0, ColorMode::Luma);
  CHECK(luma.psnr == doctest::Approx(20 * std::log10(255.0 / (3.0 * 128.553 / 255.0))).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_pair(hr, synthetic_scene(40, 41, 1), 0, ColorMode::Luma), ContractViolation);
  CHECK(parse_color("rgb") == ColorMode::Rgb);
  CHECK_THROWS_AS(parse_color("yuv"), ConfigurationError);
}

TEST_CASE("report CSV has one row per image plus a mean row") {
  MetricReport r{"bicubic", 0, "desk", 4, ColorMode::Luma, {{"a.png", 30.0, 0.9}, {"b.png", 32.0, 0.8}}};
  CHECK(r.mean_psnr() == 31.0);
  CHECK(r.mean_ssim() == doctest::Approx(0.85));
  const auto path = std::filesystem::temp_directory_path() / "metasr_report_test.csv";
  write_report_csv(path, r);
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "model,params,dataset,image,psnr,ssim,crop,color");
  CHECK(lines[3].rfind("bicubic,0,desk,mean,31,", 0) == 0);
  CHECK(format_metric(kPsnrIdentical) == "inf");
  std::filesystem::remove(path);
}

}  // TEST_SUITE
