#include "metasr/degrade.hpp"
#include "metasr/error.hpp"
#include "metasr/metrics.hpp"
#include "metasr/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>

using namespace metasr;

namespace {

ImageBuffer smooth_gradient() {
  ImageBuffer g(3, 128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) {
      g.planes[0](y, x) = 40 + 1.2 * x;
      g.planes[1](y, x) = 30 + 0.9 * y + 0.5 * x;
      g.planes[2](y, x) = 200 - 0.7 * y;
    }
  return g;
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) {
  double worst = 0.0;
  for (int c = 0; c < a.channels(); ++c) worst = std::max(worst, (a.planes[c] - b.planes[c]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_SUITE("degrade") {

TEST_CASE("gaussian kernels are normalised, symmetric, isotropic and peaked") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const double sigma = oracle::uniform(rng, kSigmaMin, kSigmaMax);
    const BlurKernel k = gaussian_kernel(sigma);
    REQUIRE(k.size() == 21);
    CHECK(std::abs(k.values.sum() - 1.0) <= 1e-12);
    CHECK(k.values.minCoeff() >= 0.0);
    CHECK(k.values == Plane<double>(k.values.transpose()));
    CHECK(k.values == Plane<double>(k.values.reverse()));
    const Plane<double> rot90 = k.values.transpose().colwise().reverse();
    CHECK((rot90 - k.values).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::Index r = 0, c = 0;
    k.values.maxCoeff(&r, &c);
    CHECK(r == 10);
    CHECK(c == 10);
  }
}

TEST_CASE("sigma 0.2 gives a near-delta kernel") {
  const BlurKernel k = gaussian_kernel(0.2);
  CHECK(k.values(10, 10) > 0.99);
  // Direct evaluation: 1 / (1 + 4 e^{-12.5} + ...).
  const double e = std::exp(-1.0 / (2 * 0.04));
  CHECK(k.values(10, 10) == doctest::Approx(1.0 / (1.0 + 4 * e + 4 * e * e)).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_kernel(0.0), ConfigurationError);
  CHECK_THROWS_AS(gaussian_kernel(-1.0), ConfigurationError);
  CHECK_THROWS_AS(gaussian_kernel(1.0, 20), ConfigurationError);
}

TEST_CASE("blur of a constant image is the same constant") {
  const ImageBuffer flat(3, 17, 23, 131.0);
  const ImageBuffer out = blur(flat, gaussian_kernel(3.1));
  CHECK(max_abs_diff(out, flat) < 1e-9);
}

TEST_CASE("near-delta blur stays within one grey level") {
  const ImageBuffer img = synthetic_scene(40, 40, 3);
  CHECK(max_abs_diff(quantize(blur(img, gaussian_kernel(0.2))), img) <= 1.0);
}

TEST_CASE("blur matches the nested-loop oracle with edge replication") {
  const ImageBuffer img = synthetic_scene(30, 26, 4);
  const BlurKernel k = gaussian_kernel(1.7);
  const ImageBuffer out = blur(img, k);
  for (int c = 0; c < 3; ++c) CHECK((out.planes[c] - oracle::blur_plane(img.planes[c], k.values)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("bicubic resize: constants, identity and sizes") {
  const ImageBuffer flat(3, 20, 28, 77.0);
  for (Scale s : {Scale{1, 4}, Scale{1, 2}, Scale{4, 1}, Scale{3, 2}}) {
    const ImageBuffer out = bicubic_resize(flat, s);
    CHECK(out.height() == resized_extent(20, s));
    CHECK(out.width() == resized_extent(28, s));
    CHECK(max_abs_diff(out, ImageBuffer(3, out.height(), out.width(), 77.0)) < 1e-9);
  }
  const ImageBuffer img = synthetic_scene(20, 28, 5);
  CHECK(bicubic_resize(img, {1, 1}) == img);
  CHECK(bicubic_resize(img, {2, 2}) == img);
  CHECK(bicubic_resize(img, {1, 4}).height() == 5);
  CHECK_THROWS_AS(bicubic_resize(img, {0, 1}), ConfigurationError);
}

TEST_CASE("bicubic x1/4 then x4 on a smooth gradient stays above 35 dB") {
  const ImageBuffer g = smooth_gradient();
  const ImageBuffer back = bicubic_resize(bicubic_resize(g, {1, 4}), {4, 1});
  const double value = psnr(back, g, 0);
  CHECK(value > 35.0);
  // Regression value recorded from the first run of this implementation.
  CHECK(value == doctest::Approx(65.788429512164).epsilon(1e-9));
}

TEST_CASE("bicubic upscaling interpolates, shrinking averages") {
  // Upscaling by 2 of a linear ramp keeps interior samples on the ramp.
  ImageBuffer ramp(3, 1, 16);
  for (int c = 0; c < 3; ++c)
    for (int x = 0; x < 16; ++x) ramp.planes[c](0, x) = 10.0 * x;
  ImageBuffer tall(3, 8, 16);
  for (int c = 0; c < 3; ++c) tall.planes[c] = ramp.planes[c].replicate(8, 1);
  const ImageBuffer up = bicubic_resize(tall, {2, 1});
  // Output sample j sits at input coordinate (j + 0.5) / 2 - 0.5.
  for (int j = 6; j < 24; ++j) CHECK(up.planes[0](4, j) == doctest::Approx(10.0 * ((j + 0.5) / 2 - 0.5)).epsilon(1e-12));
}

TEST_CASE("compress_dct: constant image survives, range checked") {
  for (double v : {0.0, 17.0, 128.0, 201.0, 255.0}) {
    const ImageBuffer flat(3, 19, 21, v);
    for (int qpi : {20, 30, 40}) CHECK(max_abs_diff(compress_dct(flat, qpi), flat) <= 1.0);
  }
  const ImageBuffer img = synthetic_scene(16, 16, 6);
  CHECK_THROWS_AS(compress_dct(img, 19), ConfigurationError);
  CHECK_THROWS_AS(compress_dct(img, 41), ConfigurationError);
  CHECK(compress_dct(img, 33) == compress_dct(img, 33));
  CHECK(qp_step(4) == 1.0);
  CHECK(qp_step(40) == doctest::Approx(64.0).epsilon(1e-15));
}

TEST_CASE("coarser quantisation loses more on each of ten scenes") {
  for (int i = 0; i < 10; ++i) {
    const ImageBuffer s = synthetic_scene(96, 96, 1000 + i);
    CHECK(psnr(s, compress_dct(s, 20), 0) > psnr(s, compress_dct(s, 40), 0));
  }
}

TEST_CASE("qpi 20 on a natural-looking scene stays above 35 dB") {
  const ImageBuffer s = synthetic_scene(96, 96, 1000);
  const double value = psnr(s, compress_dct(s, 20), 0);
  CHECK(value > 35.0);
  CHECK(value == doctest::Approx(40.220147).epsilon(1e-6));
}

TEST_CASE("degrade_image: near-identity chain, determinism and composition") {
  const ImageBuffer hr = synthetic_scene(64, 64, 7);
  DegradationRecord r{"a.png", 0.2, 1, std::nullopt, 1, Protocol::BlurOnly};
  CHECK(max_abs_diff(degrade_image(hr, r).first, hr) <= 1.0);

  DegradationRecord full{"a.png", 2.3, 4, 31, 99, Protocol::BlurCompress};
  const auto [lr1, rec1] = degrade_image(hr, full);
  const auto [lr2, rec2] = degrade_image(hr, full);
  CHECK(lr1 == lr2);
  CHECK(rec1 == full);
  CHECK(lr1.height() == 16);
  const ImageBuffer manual = compress_dct(quantize(bicubic_resize(blur(hr, gaussian_kernel(2.3)), {1, 4})), 31);
  CHECK(lr1 == manual);

  DegradationRecord compress_only{"a.png", std::nullopt, 4, 25, 3, Protocol::CompressOnly};
  CHECK(degrade_image(hr, compress_only).first == compress_dct(quantize(bicubic_resize(hr, {1, 4})), 25));
}

TEST_CASE("HR sizes that are not multiples of the scale are cropped first") {
  const ImageBuffer hr = synthetic_scene(67, 70, 8);
  CHECK(modcrop(hr, 4) == crop(hr, 0, 0, 64, 68));
  CHECK(modcrop(hr, 1) == hr);
  const auto lr = degrade_image(hr, {"x", 1.0, 4, std::nullopt, 0, Protocol::BlurOnly}).first;
  CHECK(lr.height() == 16);
  CHECK(lr.width() == 17);
  CHECK_THROWS_AS(modcrop(synthetic_scene(3, 8, 1), 4), ConfigurationError);
}

TEST_CASE("stronger blur degrades bicubic reconstruction") {
  const ImageBuffer hr = synthetic_scene(128, 128, 7);
  auto reconstruct = [&](double sigma) {
    const auto lr = degrade_image(hr, {"x", sigma, 4, std::nullopt, 0, Protocol::BlurOnly}).first;
    return psnr(bicubic_resize(lr, {4, 1}), hr, 4);
  };
  CHECK(reconstruct(3.5) < reconstruct(0.5));
}

TEST_CASE("records are validated against their protocol") {
  CHECK_THROWS_AS((DegradationRecord{"x", std::nullopt, 4, std::nullopt, 0, Protocol::BlurOnly}.validate()),
                  ConfigurationError);
  CHECK_THROWS_AS((DegradationRecord{"x", 1.0, 4, 30, 0, Protocol::BlurOnly}.validate()), ConfigurationError);
  CHECK_THROWS_AS((DegradationRecord{"x", 1.0, 4, std::nullopt, 0, Protocol::BlurCompress}.validate()),
                  ConfigurationError);
  CHECK_THROWS_AS((DegradationRecord{"x", 4.5, 4, std::nullopt, 0, Protocol::BlurOnly}.validate()),
                  ConfigurationError);
  CHECK_THROWS_AS((DegradationRecord{"x", 1.0, 4, 41, 0, Protocol::BlurCompress}.validate()), ConfigurationError);
  CHECK_NOTHROW((DegradationRecord{"x", 1.0, 4, 40, 0, Protocol::BlurCompress}.validate()));
  CHECK(parse_protocol("blur+compress") == Protocol::BlurCompress);
  CHECK_THROWS_AS(parse_protocol("jpeg"), ConfigurationError);
}

TEST_CASE("drawn sigma is uniform on [0.2, 4] and QPI uniform on 20..40") {
  std::vector<std::string> names(4000);
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = std::to_string(i) + ".png";
  const auto records = draw_records(names, Protocol::BlurCompress, 4, 2024);
  std::vector<double> sigmas;
  std::map<int, int> qpi_counts;
  for (const auto& r : records) {
    REQUIRE_NOTHROW(r.validate());
    sigmas.push_back(*r.sigma);
    ++qpi_counts[*r.qpi];
  }
  // Kolmogorov-Smirnov against U[0.2, 4]; 1.63/sqrt(n) is the 1% critical value.
  std::sort(sigmas.begin(), sigmas.end());
  double d = 0.0;
  const double n = static_cast<double>(sigmas.size());
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const double cdf = (sigmas[i] - 0.2) / 3.8;
    d = std::max({d, std::abs(cdf - i / n), std::abs((i + 1) / n - cdf)});
  }
  CHECK(d < 1.63 / std::sqrt(n));
  // Chi-square over 21 cells, 20 dof; 37.57 is the 1% critical value.
  REQUIRE(qpi_counts.size() == 21);
  CHECK(qpi_counts.begin()->first == 20);
  CHECK(qpi_counts.rbegin()->first == 40);
  double chi2 = 0.0;
  const double expected = n / 21.0;
  for (const auto& [q, count] : qpi_counts) chi2 += (count - expected) * (count - expected) / expected;
  CHECK(chi2 < 37.57);

  CHECK(draw_records(names, Protocol::BlurCompress, 4, 2024) == records);
  for (const auto& r : draw_records({"a", "b"}, Protocol::BlurOnly, 4, 1)) CHECK_FALSE(r.qpi.has_value());
}

TEST_CASE("sidecar records round-trip through JSON lines") {
  const auto records = draw_records({"a.png", "b.png", "c.png"}, Protocol::BlurCompress, 4, 5);
  const auto path = std::filesystem::temp_directory_path() / "metasr_sidecar_test.jsonl";
  write_sidecar(path, records);
  CHECK(read_sidecar(path) == records);
  const auto line = nlohmann::json(records[0]);
  for (const char* key : {"source", "sigma", "scale", "qpi", "seed", "protocol"}) CHECK(line.contains(key));
  std::filesystem::remove(path);
}

}  // TEST_SUITE
