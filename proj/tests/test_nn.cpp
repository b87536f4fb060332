#include "metasr/error.hpp"
#include "metasr/nn.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace metasr;

namespace {

Tensor random_tensor(Shape shape, std::mt19937_64& rng, bool requires_grad = false) {
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), oracle::random_vector(n, rng), requires_grad);
}

MetaAttentionParams zero_meta(int d_m, int h, int c) {
  return {Tensor::zeros({h, d_m}, true), Tensor::zeros({h}, true), Tensor::zeros({c, h}, true),
          Tensor::zeros({c}, true)};
}

std::vector<double> as_std(const Tensor& t) { return {t.values().data(), t.values().data() + t.numel()}; }

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("meta-attention with all-zero parameters halves the features") {
  std::mt19937_64 rng(1);
  const Tensor f = random_tensor({8, 4, 4}, rng);
  const Tensor m = random_tensor({10}, rng);
  const Tensor out = meta_attention_forward(f, m, zero_meta(10, 4, 8));
  CHECK((out.values() - 0.5 * f.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("meta-attention with saturated b2 is the identity") {
  std::mt19937_64 rng(2);
  const Tensor f = random_tensor({8, 4, 4}, rng);
  auto p = zero_meta(10, 4, 8);
  p.b2 = Tensor::full({8}, 40.0);
  const Tensor out = meta_attention_forward(f, random_tensor({10}, rng), p);
  CHECK((out.values() - f.values()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("meta-attention matches a hand-composed oracle") {
  std::mt19937_64 rng(3);
  const int d_m = 10, h = 4, c = 8;
  const MetaAttentionParams p = init_meta_attention(d_m, h, c, rng);
  const Tensor f = random_tensor({c, 5, 3}, rng);
  const Tensor m = random_tensor({d_m}, rng);

  auto hidden = oracle::linear(as_std(m), as_std(p.w1), as_std(p.b1));
  for (auto& v : hidden) v = std::max(0.0, v);
  auto logits = oracle::linear(hidden, as_std(p.w2), as_std(p.b2));
  const Tensor out = meta_attention_forward(f, m, p);
  for (int ch = 0; ch < c; ++ch) {
    const double w = oracle::sigmoid(logits[ch]);
    for (int i = 0; i < 15; ++i) CHECK(std::abs(out.values()[ch * 15 + i] - w * f.values()[ch * 15 + i]) <= 1e-12);
  }
}

TEST_CASE("meta-attention rejects metadata of the wrong length") {
  std::mt19937_64 rng(4);
  const auto p = init_meta_attention(10, 4, 8, rng);
  CHECK_THROWS_AS(meta_attention_forward(Tensor({8, 2, 2}), Tensor({11}), p), ContractViolation);
  CHECK_THROWS_AS(meta_attention_forward(Tensor({8, 2, 2}), Tensor{}, p), ContractViolation);
  CHECK_THROWS_AS(meta_attention_forward(Tensor({7, 2, 2}), Tensor({10}), p), ContractViolation);
}

TEST_CASE("attention entries lie strictly inside (0,1) and bound the output") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = init_meta_attention(11, 8, 16, rng);
    const Tensor m(Shape{11}, oracle::random_vector(11, rng, -5.0, 5.0));
    const Tensor w = attention_vector(m, p);
    CHECK(w.values().minCoeff() > 0.0);
    CHECK(w.values().maxCoeff() < 1.0);
    const Tensor f = random_tensor({16, 2, 2}, rng);
    CHECK((meta_attention_forward(f, m, p).values().cwiseAbs().array() <= f.values().cwiseAbs().array()).all());
  }
}

TEST_CASE("residual block with a zero second conv passes x through") {
  std::mt19937_64 rng(6);
  ResidualBlockParams p{init_conv(4, 4, 3, rng), {Tensor::zeros({4, 4, 3, 3}), Tensor::zeros({4})},
                        init_meta_attention(10, 2, 4, rng), 1.0};
  const Tensor x = random_tensor({4, 6, 6}, rng);
  CHECK(residual_block_forward(x, random_tensor({10}, rng), p).values() == x.values());
  CHECK(residual_block_forward(x, random_tensor({10}, rng), p).values() == x.values());
}

TEST_CASE("saturated meta block reproduces the plain block") {
  std::mt19937_64 rng(7);
  ResidualBlockParams plain{init_conv(4, 4, 3, rng), init_conv(4, 4, 3, rng), std::nullopt, 1.0};
  ResidualBlockParams meta = plain;
  meta.meta = zero_meta(10, 2, 4);
  meta.meta->b2 = Tensor::full({4}, 40.0);
  const Tensor x = random_tensor({4, 6, 6}, rng);
  const Tensor y_plain = residual_block_forward(x, Tensor{}, plain);
  const Tensor y_meta = residual_block_forward(x, random_tensor({10}, rng), meta);
  CHECK((y_plain.values() - y_meta.values()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(residual_block_forward(x, Tensor{}, meta), ContractViolation);
}

TEST_CASE("residual block equals manual composition of its stages") {
  std::mt19937_64 rng(8);
  ResidualBlockParams p{init_conv(4, 4, 3, rng), init_conv(4, 4, 3, rng), init_meta_attention(10, 2, 4, rng), 0.5};
  const Tensor x = random_tensor({4, 5, 7}, rng);
  const Tensor m = random_tensor({10}, rng);
  const auto c1 = oracle::conv2d(as_std(x), 4, 5, 7, as_std(p.conv1.weight), 4, 3, as_std(p.conv1.bias), 1);
  std::vector<double> r1(c1.size());
  for (std::size_t i = 0; i < c1.size(); ++i) r1[i] = std::max(0.0, c1[i]);
  const auto c2 = oracle::conv2d(r1, 4, 5, 7, as_std(p.conv2.weight), 4, 3, as_std(p.conv2.bias), 1);
  auto hidden = oracle::linear(as_std(m), as_std(p.meta->w1), as_std(p.meta->b1));
  for (auto& v : hidden) v = std::max(0.0, v);
  const auto logits = oracle::linear(hidden, as_std(p.meta->w2), as_std(p.meta->b2));
  const Tensor y = residual_block_forward(x, m, p);
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 35; ++i) {
      const double expected = x.values()[c * 35 + i] + 0.5 * oracle::sigmoid(logits[c]) * c2[c * 35 + i];
      CHECK(std::abs(y.values()[c * 35 + i] - expected) <= 1e-12);
    }
}

TEST_CASE("full meta residual block passes grad_check") {
  std::mt19937_64 rng(9);
  ResidualBlockParams p{init_conv(3, 3, 3, rng), init_conv(3, 3, 3, rng), init_meta_attention(5, 2, 3, rng), 1.0};
  const Tensor x = random_tensor({3, 5, 5}, rng, true);
  const Tensor m = random_tensor({5}, rng);
  const Tensor probe = random_tensor({3, 5, 5}, rng);
  std::vector<Tensor> inputs{x,           p.conv1.weight, p.conv1.bias, p.conv2.weight, p.conv2.bias,
                             p.meta->w1, p.meta->b1,     p.meta->w2,   p.meta->b2};
  const double err = grad_check(
      [&](std::span<const Tensor> in) {
        ResidualBlockParams q{{in[1], in[2]}, {in[3], in[4]}, MetaAttentionParams{in[5], in[6], in[7], in[8]}, 1.0};
        return sum(mul(residual_block_forward(in[0], m, q), probe));
      },
      inputs);
  CHECK(err < 1e-4);
  CHECK_FALSE(m.requires_grad());
}

TEST_CASE("param_count reproduces the published parameter deltas") {
  const auto rcan = param_count(64, 10, 32, 200);
  CHECK(rcan.per_block == 2464);
  CHECK(rcan.total == 492800);
  CHECK(rcan.total == 16085155 - 15592355);
  const auto edsr = param_count(256, 10, 128, 32);
  CHECK(edsr.per_block == 34432);
  CHECK(edsr.total == 1101824);
  CHECK(edsr.total == 44191747 - 43089923);
  CHECK(param_count(1, 1, 1, 1).per_block == 4);
}

TEST_CASE("param_count agrees with the tensors init_meta_attention allocates") {
  std::mt19937_64 rng(10);
  for (int c : {1, 4, 16}) {
    for (int d : {1, 10, 11}) {
      const int h = std::max(1, c / 2);
      const auto p = init_meta_attention(d, h, c, rng);
      CHECK(p.w1.numel() + p.b1.numel() + p.w2.numel() + p.b2.numel() == param_count(c, d, h, 1).per_block);
    }
  }
}

TEST_CASE("initialisation respects the fan-in bound and is seed-deterministic") {
  std::mt19937_64 a(42), b(42);
  const auto ca = init_conv(16, 8, 3, a), cb = init_conv(16, 8, 3, b);
  CHECK(ca.weight.values() == cb.weight.values());
  CHECK(ca.weight.values().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(144.0));
  CHECK(ca.bias.values().cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(144.0));
}

}  // TEST_SUITE
