#pragma once

// Desk-scale residual SR network:
//
//   head conv (3->C) -> N residual blocks [+ meta-attention] -> global skip
//   -> per x2 stage: conv (C->4C) + pixel shuffle -> tail conv (C->3)

#include "metasr/meta_encode.hpp"
#include "metasr/nn.hpp"
#include "metasr/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metasr {

struct NetworkConfig {
  int channels = 16;
  int n_blocks = 4;
  int scale = 4;
  bool meta_enabled = false;
  MetadataLayout layout = MetadataLayout::KernelPca;
  int hidden = 0;  // 0 selects channels / 2
  double residual_scale = 1.0;
  int kernel_size = 3;
  bool global_skip = true;

  int metadata_dim() const { return layout_length(layout); }
  int hidden_units() const { return hidden > 0 ? hidden : std::max(1, channels / 2); }
  int upsample_stages() const;
  void validate() const;
};

bool operator==(const NetworkConfig& a, const NetworkConfig& b);
void to_json(nlohmann::json& j, const NetworkConfig& c);
void from_json(const nlohmann::json& j, NetworkConfig& c);

struct Network {
  NetworkConfig config;
  ConvParams head;
  std::vector<ResidualBlockParams> blocks;
  std::vector<ConvParams> upsample;  // one per x2 stage
  ConvParams tail;

  /// Every trainable tensor in declaration order: head, blocks (conv1, conv2,
  /// then W1 b1 W2 b2 when present), upsample stages, tail.
  std::vector<Tensor> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::int64_t parameter_count() const;
  std::int64_t meta_parameter_count() const;
};

/// Copy of `net` whose parameters are the given tensors, in parameters()
/// order. The tensors are shared, not copied.
Network bind_parameters(const Network& net, std::span<const Tensor> params);

/// Closed-form trainable parameter count for a configuration.
std::int64_t analytic_parameter_count(const NetworkConfig& config);

/// Convolutions draw from one generator and meta-attention layers from a
/// second, both derived from `seed`, so plain and meta variants built from
/// the same seed share identical convolution weights.
Network build_network(const NetworkConfig& config, std::uint64_t seed);

/// lr: [3,H,W] in [0,1]. metadata must be defined iff config.meta_enabled;
/// it is ignored otherwise.
Tensor forward(const Network& net, const Tensor& lr, const Tensor& metadata = {});

struct Checkpoint {
  Network network;
  int epoch = 0;
  double val_psnr = 0.0;
  std::optional<std::string> pca_digest;
};

// Layout: magic "MSRCKPT1", little-endian u64 header length, JSON header
// {format, version, config, epoch, val_psnr, pca_digest, parameter_count,
// tensors:[{name, shape}]}, then float64 parameters in declaration order.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Deep copy with fresh parameter storage.
Network clone_network(const Network& net);

}  // namespace metasr
