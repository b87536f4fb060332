#include "metasr/error.hpp"
#include "metasr/synth.hpp"
#include "metasr/trainer.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace metasr;

namespace {

Dataset tiny_dataset(int count, std::uint64_t seed, std::optional<MetadataLayout> layout = std::nullopt) {
  Dataset d;
  d.layout = layout;
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) names.push_back("img" + std::to_string(i) + ".png");
  const auto records = draw_records(names, Protocol::BlurCompress, 4, seed);
  for (int i = 0; i < count; ++i) {
    TrainingSample s;
    s.name = names[i];
    s.hr = synthetic_scene(48, 48, seed * 100 + i);
    s.lr = degrade_image(s.hr, records[i]).first;
    s.record = records[i];
    if (layout) s.metadata = encode_metadata(records[i], nullptr, *layout);
    d.samples.push_back(std::move(s));
  }
  return d;
}

NetworkConfig tiny_config(bool meta) {
  NetworkConfig c;
  c.channels = 4;
  c.n_blocks = 1;
  c.meta_enabled = meta;
  c.layout = MetadataLayout::Qpi;
  return c;
}

TrainConfig tiny_train(int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.patch_size = 8;
  t.batch_size = 4;
  t.lr_max = 1e-3;
  t.lr_min = 1e-5;
  t.val_every = 1;
  t.seed = 5;
  return t;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("adam matches the scalar oracle over ten steps on a quadratic") {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd target = oracle::random_vector(6, rng);
  Tensor p({6}, oracle::random_vector(6, rng));
  std::vector<double> ref(p.values().data(), p.values().data() + 6);
  oracle::Adam adam_ref;
  AdamState state;
  std::vector<Tensor> params{p};
  for (int step = 0; step < 10; ++step) {
    const Eigen::VectorXd g = 2.0 * (p.values() - target);
    std::vector<double> g_ref(6);
    for (int i = 0; i < 6; ++i) g_ref[i] = 2.0 * (ref[i] - target[i]);
    adam_step(params, std::vector<Eigen::VectorXd>{g}, state, 0.05);
    adam_ref.step(ref, g_ref, 0.05);
  }
  CHECK(state.step == 10);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(p.values()[i] - ref[i]) <= 1e-10);
}

TEST_CASE("adam: zero gradients are a no-op and the first step has size lr") {
  Tensor p({3}, Eigen::Vector3d(1.0, -2.0, 0.5));
  const Eigen::VectorXd before = p.values();
  std::vector<Tensor> params{p};
  AdamState state;
  adam_step(params, std::vector<Eigen::VectorXd>{Eigen::VectorXd::Zero(3)}, state, 0.1);
  CHECK(p.values() == before);

  AdamState fresh;
  const double lr = 1e-3;
  adam_step(params, std::vector<Eigen::VectorXd>{Eigen::Vector3d(0.3, -7.0, 1e-3)}, fresh, lr);
  const Eigen::VectorXd delta = p.values() - before;
  CHECK(std::abs(delta[0] + lr) <= lr * 1e-6);
  CHECK(std::abs(delta[1] - lr) <= lr * 1e-6);
  CHECK(std::abs(delta[2] + lr) <= lr * 1e-4);

  const Eigen::VectorXd kept = p.values();
  CHECK_THROWS_AS(adam_step(params, std::vector<Eigen::VectorXd>{Eigen::Vector3d(1.0, NAN, 0.0)}, fresh, lr),
                  NumericalError);
  CHECK(p.values() == kept);
  CHECK(fresh.step == 1);
}

TEST_CASE("cosine schedule endpoints and midpoint") {
  CHECK(cosine_lr(0, 200, 1e-4, 1e-7) == 1e-4);
  CHECK(cosine_lr(200, 200, 1e-4, 1e-7) == doctest::Approx(1e-7).epsilon(1e-12));
  CHECK(cosine_lr(100, 200, 1e-4, 1e-7) == doctest::Approx((1e-4 + 1e-7) / 2).epsilon(1e-12));
  for (int e = 1; e <= 200; ++e) CHECK(cosine_lr(e, 200, 1e-4, 1e-7) < cosine_lr(e - 1, 200, 1e-4, 1e-7));
  CHECK_THROWS_AS(cosine_lr(201, 200, 1e-4, 1e-7), ContractViolation);
}

TEST_CASE("dihedral transforms are invertible and distinct") {
  const ImageBuffer img = synthetic_scene(6, 9, 2);
  for (int e = 0; e < 8; ++e) {
    CHECK(invert_dihedral(apply_dihedral(img, e), e) == img);
    for (int f = 0; f < e; ++f) CHECK_FALSE(apply_dihedral(img, e) == apply_dihedral(img, f));
  }
  CHECK(apply_dihedral(img, 0) == img);
  CHECK(apply_dihedral(img, 1).height() == 9);
  CHECK(apply_dihedral(apply_dihedral(img, 1), 1) == apply_dihedral(img, 2));
}

TEST_CASE("patches are aligned, scaled and deterministic") {
  const ImageBuffer hr = synthetic_scene(320, 320, 3);
  const ImageBuffer lr = degrade_image(hr, {"x", 1.0, 4, std::nullopt, 0, Protocol::BlurOnly}).first;
  std::mt19937_64 a(7), b(7);
  for (int i = 0; i < 20; ++i) {
    const auto p = sample_patch(lr, hr, 64, 4, a);
    const auto q = sample_patch(lr, hr, 64, 4, b);
    REQUIRE(p.has_value());
    CHECK(p->lr.height() == 64);
    CHECK(p->hr.height() == 256);
    CHECK(p->hr.width() == 256);
    CHECK(p->lr == q->lr);
    CHECK(p->hr == q->hr);
    CHECK(p->y == q->y);
    // Undoing the augmentation recovers the aligned windows.
    CHECK(invert_dihedral(p->lr, p->transform) == crop(lr, p->y, p->x, 64, 64));
    CHECK(invert_dihedral(p->hr, p->transform) == crop(hr, 4 * p->y, 4 * p->x, 256, 256));
  }
  CHECK_FALSE(sample_patch(crop(lr, 0, 0, 40, 80), crop(hr, 0, 0, 160, 320), 64, 4, a).has_value());
  CHECK_THROWS_AS(sample_patch(lr, crop(hr, 0, 0, 300, 320), 64, 4, a), ContractViolation);
}

TEST_CASE("zero learning rate leaves the network untouched") {
  const Dataset data = tiny_dataset(4, 1);
  const Network net = build_network(tiny_config(false), 3);
  TrainConfig cfg = tiny_train(1);
  cfg.lr_max = cfg.lr_min = 0.0;
  const TrainResult r = train(net, data, data, cfg);
  const auto before = net.parameters(), after = r.final_network.parameters();
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i].values() == after[i].values());
  const double initial = validate_network(net, data, 4, ColorMode::Luma).psnr;
  REQUIRE(r.trace.front().val_psnr.has_value());
  CHECK(*r.trace.front().val_psnr == initial);
  CHECK(r.best.epoch == 1);
}

TEST_CASE("training is deterministic to the last bit and lowers the loss") {
  const Dataset data = tiny_dataset(8, 2);
  const Dataset val = tiny_dataset(2, 3);
  const Network net = build_network(tiny_config(false), 4);
  TrainConfig cfg = tiny_train(50);
  cfg.val_every = 10;
  const TrainResult a = train(net, data, val, cfg), b = train(net, data, val, cfg);
  REQUIRE(a.trace.size() == 50);
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].train_loss == b.trace[i].train_loss);
    CHECK(a.trace[i].val_psnr == b.trace[i].val_psnr);
  }
  CHECK(a.trace.back().train_loss < a.trace.front().train_loss);
  CHECK_FALSE(a.trace[4].val_psnr.has_value());
  CHECK(a.trace[9].val_psnr.has_value());
  CHECK(a.best.val_psnr == validate_network(a.best.network, val, 4, ColorMode::Luma).psnr);
}

TEST_CASE("best checkpoint survives a save/load round trip") {
  const Dataset data = tiny_dataset(4, 4, MetadataLayout::Qpi);
  const TrainResult r = train(build_network(tiny_config(true), 1), data, data, tiny_train(3));
  const auto path = std::filesystem::temp_directory_path() / "metasr_trainer_ckpt.ckpt";
  save_checkpoint(path, r.best);
  const Checkpoint back = load_checkpoint(path);
  CHECK(std::abs(validate_network(back.network, data, 4, ColorMode::Luma).psnr - r.best.val_psnr) <= 1e-12);
  std::filesystem::remove(path);
}

TEST_CASE("layout mismatches abort training") {
  const Dataset qpi_data = tiny_dataset(2, 5, MetadataLayout::Qpi);
  NetworkConfig cfg = tiny_config(true);
  cfg.layout = MetadataLayout::KernelPca;
  CHECK_THROWS_AS(train(build_network(cfg, 1), qpi_data, qpi_data, tiny_train(1)), ConfigurationError);
  const Dataset bare = tiny_dataset(2, 5);
  CHECK_THROWS_AS(train(build_network(tiny_config(true), 1), bare, bare, tiny_train(1)), ConfigurationError);
  TrainConfig bad = tiny_train(1);
  bad.lr_min = 1.0;
  CHECK_THROWS_AS(train(build_network(tiny_config(false), 1), bare, bare, bad), ConfigurationError);
}

TEST_CASE("trace CSV has the documented columns") {
  const auto path = std::filesystem::temp_directory_path() / "metasr_trace_test.csv";
  write_trace_csv(path, {{1, 1e-4, 0.25, std::nullopt, std::nullopt}, {2, 5e-5, 0.125, 30.5, 0.75}});
  std::ifstream in(path);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "epoch,lr,train_loss,val_psnr,val_ssim");
  CHECK(first == "1,0.0001,0.25,,");
  CHECK(second == "2,5.0000000000000002e-05,0.125,30.5,0.75");
  std::filesystem::remove(path);
}

}  // TEST_SUITE
