#include "metasr/nn.hpp"

#include "metasr/error.hpp"

#include <cmath>

namespace metasr {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace {

Tensor uniform_tensor(Shape shape, double bound, std::mt19937_64& rng) {
  Tensor t(std::move(shape), true);
  for (double& v : t.mutable_values()) v = (2.0 * uniform01(rng) - 1.0) * bound;
  return t;
}

}  // namespace

ConvParams init_conv(int c_in, int c_out, int kernel, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(c_in) * kernel * kernel);
  ConvParams p;
  p.weight = uniform_tensor({c_out, c_in, kernel, kernel}, bound, rng);
  p.bias = uniform_tensor({c_out}, bound, rng);
  return p;
}

MetaAttentionParams init_meta_attention(int metadata_dim, int hidden, int channels, std::mt19937_64& rng) {
  if (metadata_dim < 1 || hidden < 1 || channels < 1) {
    throw ConfigurationError("meta-attention needs d_m, h and C all >= 1");
  }
  MetaAttentionParams p;
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(metadata_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  p.w1 = uniform_tensor({hidden, metadata_dim}, bound1, rng);
  p.b1 = uniform_tensor({hidden}, bound1, rng);
  p.w2 = uniform_tensor({channels, hidden}, bound2, rng);
  p.b2 = uniform_tensor({channels}, bound2, rng);
  return p;
}

Tensor attention_vector(const Tensor& metadata, const MetaAttentionParams& params) {
  if (!metadata.defined() || metadata.rank() != 1 || metadata.dim(0) != params.metadata_dim()) {
    throw ContractViolation("meta-attention expects a metadata vector of length " +
                            std::to_string(params.metadata_dim()) + ", got " +
                            (metadata.defined() ? shape_string(metadata.shape()) : std::string("none")));
  }
  return sigmoid(linear(relu(linear(metadata, params.w1, params.b1)), params.w2, params.b2));
}

Tensor meta_attention_forward(const Tensor& features, const Tensor& metadata, const MetaAttentionParams& params) {
  if (features.rank() != 3 || features.dim(0) != params.channels()) {
    throw ContractViolation("meta-attention configured for " + std::to_string(params.channels()) +
                            " channels, features are " + shape_string(features.shape()));
  }
  return channel_scale(features, attention_vector(metadata, params));
}

Tensor residual_block_forward(const Tensor& x, const Tensor& metadata, const ResidualBlockParams& params) {
  const int pad1 = params.conv1.weight.dim(2) / 2;
  const int pad2 = params.conv2.weight.dim(2) / 2;
  Tensor branch = conv2d(relu(conv2d(x, params.conv1.weight, params.conv1.bias, pad1)), params.conv2.weight,
                         params.conv2.bias, pad2);
  if (params.meta) {
    if (!metadata.defined()) throw ContractViolation("meta residual block called without metadata");
    branch = meta_attention_forward(branch, metadata, *params.meta);
  }
  if (params.residual_scale != 1.0) branch = scale(branch, params.residual_scale);
  return add(x, branch);
}

MetaParamCount param_count(std::int64_t channels, std::int64_t metadata_dim, std::int64_t hidden,
                           std::int64_t n_blocks) {
  const std::int64_t per_block = (metadata_dim + 1) * hidden + (hidden + 1) * channels;
  return {per_block, per_block * n_blocks};
}

}  // namespace metasr
