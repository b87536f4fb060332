#include "metasr/srnet.hpp"

#include "metasr/error.hpp"
#include "metasr/io.hpp"

#include <cmath>
#include <limits>

namespace metasr {

int NetworkConfig::upsample_stages() const { return scale == 4 ? 2 : 1; }

void NetworkConfig::validate() const {
  if (channels < 1) throw ConfigurationError("network needs at least one channel");
  if (n_blocks < 0) throw ConfigurationError("negative block count");
  if (scale != 2 && scale != 4) throw ConfigurationError("network scale must be 2 or 4");
  if (hidden < 0) throw ConfigurationError("hidden width must be >= 1 (or 0 for C/2)");
  if (kernel_size < 1 || kernel_size % 2 == 0) throw ConfigurationError("kernel size must be odd");
}

bool operator==(const NetworkConfig& a, const NetworkConfig& b) {
  return a.channels == b.channels && a.n_blocks == b.n_blocks && a.scale == b.scale &&
         a.meta_enabled == b.meta_enabled && a.layout == b.layout && a.hidden_units() == b.hidden_units() &&
         a.residual_scale == b.residual_scale && a.kernel_size == b.kernel_size && a.global_skip == b.global_skip;
}

void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = {{"channels", c.channels},          {"n_blocks", c.n_blocks},
       {"scale", c.scale},                {"meta_enabled", c.meta_enabled},
       {"layout", layout_name(c.layout)}, {"metadata_dim", c.metadata_dim()},
       {"hidden", c.hidden_units()},      {"residual_scale", c.residual_scale},
       {"kernel_size", c.kernel_size},    {"global_skip", c.global_skip}};
}

void from_json(const nlohmann::json& j, NetworkConfig& c) {
  c.channels = j.at("channels").get<int>();
  c.n_blocks = j.at("n_blocks").get<int>();
  c.scale = j.at("scale").get<int>();
  c.meta_enabled = j.at("meta_enabled").get<bool>();
  c.layout = parse_layout(j.at("layout").get<std::string>());
  c.hidden = j.at("hidden").get<int>();
  c.residual_scale = j.at("residual_scale").get<double>();
  c.kernel_size = j.at("kernel_size").get<int>();
  c.global_skip = j.at("global_skip").get<bool>();
  if (j.contains("metadata_dim") && j.at("metadata_dim").get<int>() != c.metadata_dim()) {
    throw ConfigurationError("checkpoint metadata_dim disagrees with its layout");
  }
}

std::vector<Tensor> Network::parameters() const {
  std::vector<Tensor> params{head.weight, head.bias};
  for (const auto& b : blocks) {
    params.insert(params.end(), {b.conv1.weight, b.conv1.bias, b.conv2.weight, b.conv2.bias});
    if (b.meta) params.insert(params.end(), {b.meta->w1, b.meta->b1, b.meta->w2, b.meta->b2});
  }
  for (const auto& s : upsample) params.insert(params.end(), {s.weight, s.bias});
  params.insert(params.end(), {tail.weight, tail.bias});
  return params;
}

Network bind_parameters(const Network& net, std::span<const Tensor> params) {
  Network out = net;
  std::size_t i = 0;
  auto take = [&]() -> Tensor {
    if (i >= params.size()) throw ContractViolation("bind_parameters: too few tensors");
    return params[i++];
  };
  auto take_conv = [&](ConvParams& c) {
    c.weight = take();
    c.bias = take();
  };
  take_conv(out.head);
  for (auto& b : out.blocks) {
    take_conv(b.conv1);
    take_conv(b.conv2);
    if (b.meta) {
      b.meta->w1 = take();
      b.meta->b1 = take();
      b.meta->w2 = take();
      b.meta->b2 = take();
    }
  }
  for (auto& s : out.upsample) take_conv(s);
  take_conv(out.tail);
  if (i != params.size()) throw ContractViolation("bind_parameters: too many tensors");
  const auto expected = net.parameters();
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (expected[k].shape() != params[k].shape()) throw ContractViolation("bind_parameters: shape mismatch");
  }
  return out;
}

std::vector<std::string> Network::parameter_names() const {
  std::vector<std::string> names{"head.weight", "head.bias"};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    for (const char* n : {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias"}) names.push_back(p + n);
    if (blocks[i].meta)
      for (const char* n : {"meta.w1", "meta.b1", "meta.w2", "meta.b2"}) names.push_back(p + n);
  }
  for (std::size_t i = 0; i < upsample.size(); ++i) {
    names.push_back("upsample." + std::to_string(i) + ".weight");
    names.push_back("upsample." + std::to_string(i) + ".bias");
  }
  names.insert(names.end(), {"tail.weight", "tail.bias"});
  return names;
}

std::int64_t Network::parameter_count() const {
  std::int64_t n = 0;
  for (const auto& t : parameters()) n += t.numel();
  return n;
}

std::int64_t Network::meta_parameter_count() const {
  std::int64_t n = 0;
  for (const auto& b : blocks)
    if (b.meta) n += b.meta->w1.numel() + b.meta->b1.numel() + b.meta->w2.numel() + b.meta->b2.numel();
  return n;
}

std::int64_t analytic_parameter_count(const NetworkConfig& config) {
  const std::int64_t c = config.channels, k2 = static_cast<std::int64_t>(config.kernel_size) * config.kernel_size;
  const std::int64_t head = 3 * c * k2 + c;
  const std::int64_t block = 2 * (c * c * k2 + c);
  const std::int64_t stage = c * 4 * c * k2 + 4 * c;
  const std::int64_t tail = c * 3 * k2 + 3;
  std::int64_t total = head + config.n_blocks * block + config.upsample_stages() * stage + tail;
  if (config.meta_enabled) {
    total += param_count(c, config.metadata_dim(), config.hidden_units(), config.n_blocks).total;
  }
  return total;
}

Network build_network(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::mt19937_64 meta_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const int c = config.channels, k = config.kernel_size;
  Network net;
  net.config = config;
  net.head = init_conv(3, c, k, rng);
  for (int i = 0; i < config.n_blocks; ++i) {
    ResidualBlockParams block;
    block.conv1 = init_conv(c, c, k, rng);
    block.conv2 = init_conv(c, c, k, rng);
    block.residual_scale = config.residual_scale;
    if (config.meta_enabled) {
      block.meta = init_meta_attention(config.metadata_dim(), config.hidden_units(), c, meta_rng);
    }
    net.blocks.push_back(std::move(block));
  }
  for (int s = 0; s < config.upsample_stages(); ++s) net.upsample.push_back(init_conv(c, 4 * c, k, rng));
  net.tail = init_conv(c, 3, k, rng);
  return net;
}

Tensor forward(const Network& net, const Tensor& lr, const Tensor& metadata) {
  if (!lr.defined() || lr.rank() != 3 || lr.dim(0) != 3) {
    throw ContractViolation("network input must be [3,H,W]");
  }
  Tensor m;
  if (net.config.meta_enabled) {
    if (!metadata.defined()) throw ContractViolation("meta network called without a metadata vector");
    if (metadata.rank() != 1 || metadata.dim(0) != net.config.metadata_dim()) {
      throw ContractViolation("metadata length " + shape_string(metadata.shape()) + " but network expects " +
                              std::to_string(net.config.metadata_dim()) + " (" + layout_name(net.config.layout) +
                              ")");
    }
    m = metadata;
  }
  const int pad = net.config.kernel_size / 2;
  Tensor features = conv2d(lr, net.head.weight, net.head.bias, pad);
  Tensor body = features;
  for (const auto& block : net.blocks) body = residual_block_forward(body, m, block);
  if (net.config.global_skip) body = add(body, features);
  for (const auto& stage : net.upsample) body = pixel_shuffle(conv2d(body, stage.weight, stage.bias, pad), 2);
  return conv2d(body, net.tail.weight, net.tail.bias, pad);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const Network& net = checkpoint.network;
  FramedFile file;
  nlohmann::json tensors = nlohmann::json::array();
  const auto params = net.parameters();
  const auto names = net.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    tensors.push_back({{"name", names[i]}, {"shape", params[i].shape()}});
    file.payload.insert(file.payload.end(), params[i].values().data(),
                        params[i].values().data() + params[i].numel());
  }
  file.header = {{"format", "metasr-checkpoint"},
                 {"version", 1},
                 {"config", net.config},
                 {"epoch", checkpoint.epoch},
                 {"val_psnr", std::isfinite(checkpoint.val_psnr) ? nlohmann::json(checkpoint.val_psnr)
                                                                 : nlohmann::json(nullptr)},
                 {"pca_digest", checkpoint.pca_digest ? nlohmann::json(*checkpoint.pca_digest)
                                                      : nlohmann::json(nullptr)},
                 {"parameter_count", net.parameter_count()},
                 {"tensors", tensors}};
  write_framed(path, "MSRCKPT1", file);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  FramedFile file = read_framed(path, "MSRCKPT1");
  Checkpoint ck;
  try {
    const NetworkConfig config = file.header.at("config").get<NetworkConfig>();
    ck.network = build_network(config, 0);
    ck.epoch = file.header.at("epoch").get<int>();
    const auto& psnr = file.header.at("val_psnr");
    ck.val_psnr = psnr.is_null() ? std::numeric_limits<double>::infinity() : psnr.get<double>();
    const auto& digest = file.header.at("pca_digest");
    if (!digest.is_null()) ck.pca_digest = digest.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(path.string() + ": bad checkpoint header: " + e.what());
  }
  auto params = ck.network.parameters();
  std::size_t offset = 0;
  for (auto& p : params) {
    if (offset + static_cast<std::size_t>(p.numel()) > file.payload.size()) break;
    p.mutable_values() = Eigen::Map<const Eigen::VectorXd>(file.payload.data() + offset, p.numel());
    offset += static_cast<std::size_t>(p.numel());
  }
  if (offset != file.payload.size() || static_cast<std::int64_t>(offset) != ck.network.parameter_count()) {
    throw ConfigurationError(path.string() + ": parameter payload does not match the stored configuration");
  }
  return ck;
}

Network clone_network(const Network& net) {
  Network copy = build_network(net.config, 0);
  auto src = net.parameters();
  auto dst = copy.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i].mutable_values() = src[i].values();
  return copy;
}

}  // namespace metasr
