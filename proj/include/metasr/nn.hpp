#pragma once

// Meta-attention and the residual block that hosts it.
//
// Meta-attention turns a per-image degradation descriptor m into one
// weight per feature channel:
//
//   w = sigmoid(W2 * relu(W1 * m + b1) + b2),   out[c] = w[c] * features[c]
//
// so the FC stack has d_m inputs, h hidden units and as many outputs as the
// host feature map has channels. m is a constant input; only the FC
// weights and biases are trained.

#include "metasr/tensor.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace metasr {

struct MetaAttentionParams {
  Tensor w1;  // [h, d_m]
  Tensor b1;  // [h]
  Tensor w2;  // [C, h]
  Tensor b2;  // [C]

  int metadata_dim() const { return w1.dim(1); }
  int hidden() const { return w1.dim(0); }
  int channels() const { return w2.dim(0); }
};

struct ConvParams {
  Tensor weight;  // [C_out, C_in, k, k]
  Tensor bias;    // [C_out]
};

struct ResidualBlockParams {
  ConvParams conv1;
  ConvParams conv2;
  std::optional<MetaAttentionParams> meta;
  double residual_scale = 1.0;
};

/// Fan-in scaled uniform initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in))
/// for both weights and biases (the stock PyTorch default for conv and
/// linear layers).
ConvParams init_conv(int c_in, int c_out, int kernel, std::mt19937_64& rng);
MetaAttentionParams init_meta_attention(int metadata_dim, int hidden, int channels, std::mt19937_64& rng);

/// Uniform double in [0, 1) built from the top 53 bits of one draw; unlike
/// std::uniform_real_distribution its output is fixed across standard
/// libraries.
double uniform01(std::mt19937_64& rng);

/// The attention vector itself, shape [C], every entry in (0, 1).
Tensor attention_vector(const Tensor& metadata, const MetaAttentionParams& params);

Tensor meta_attention_forward(const Tensor& features, const Tensor& metadata, const MetaAttentionParams& params);

/// y = x + residual_scale * MA(conv2(relu(conv1(x))), m). The MA stage is the
/// identity when params.meta is empty, in which case metadata may be
/// undefined.
Tensor residual_block_forward(const Tensor& x, const Tensor& metadata, const ResidualBlockParams& params);

struct MetaParamCount {
  std::int64_t per_block;
  std::int64_t total;
};

/// Trainable parameters added by meta-attention: (d_m + 1) * h + (h + 1) * C
/// per block, times the number of blocks.
MetaParamCount param_count(std::int64_t channels, std::int64_t metadata_dim, std::int64_t hidden,
                           std::int64_t n_blocks);

}  // namespace metasr
