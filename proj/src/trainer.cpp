#include "metasr/trainer.hpp"

#include "metasr/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>

namespace metasr {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigurationError("epochs must be >= 1");
  if (patch_size < 1) throw ConfigurationError("patch size must be >= 1");
  if (batch_size < 1) throw ConfigurationError("batch size must be >= 1");
  if (val_every < 1) throw ConfigurationError("validation cadence must be >= 1");
  // Equal bounds are accepted so a zero learning rate can be used as a no-op run.
  if (lr_min < 0.0 || lr_max < lr_min) throw ConfigurationError("need lr_max >= lr_min >= 0");
}

void adam_step(std::span<Tensor> params, std::span<const Eigen::VectorXd> grads, AdamState& state, double lr,
               const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw ContractViolation("adam_step: one gradient per parameter required");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].numel()) throw ContractViolation("adam_step: gradient shape mismatch");
    if (!grads[i].allFinite()) throw NumericalError("adam_step: non-finite gradient");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.push_back(Eigen::VectorXd::Zero(p.numel()));
      state.second_moment.push_back(Eigen::VectorXd::Zero(p.numel()));
    }
  }
  if (state.first_moment.size() != params.size()) throw ContractViolation("adam_step: state/parameter mismatch");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hyper.beta1, t);
  const double correction2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    m = hyper.beta1 * m + (1.0 - hyper.beta1) * grads[i];
    v = hyper.beta2 * v + (1.0 - hyper.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].mutable_values().array() -=
        lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + hyper.eps);
  }
}

double cosine_lr(int epoch, int total, double lr_max, double lr_min) {
  if (total < 1 || epoch < 0 || epoch > total) throw ContractViolation("cosine_lr: need 0 <= epoch <= total");
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * epoch / total));
}

namespace {

Plane<double> rotate_ccw(const Plane<double>& p) { return p.transpose().colwise().reverse(); }
Plane<double> rotate_cw(const Plane<double>& p) { return p.transpose().rowwise().reverse(); }

}  // namespace

ImageBuffer apply_dihedral(const ImageBuffer& image, int element) {
  ImageBuffer out = image;
  for (auto& plane : out.planes) {
    if (element & 4) plane = plane.rowwise().reverse().eval();
    for (int r = 0; r < (element & 3); ++r) plane = rotate_ccw(plane);
  }
  return out;
}

ImageBuffer invert_dihedral(const ImageBuffer& image, int element) {
  ImageBuffer out = image;
  for (auto& plane : out.planes) {
    for (int r = 0; r < (element & 3); ++r) plane = rotate_cw(plane);
    if (element & 4) plane = plane.rowwise().reverse().eval();
  }
  return out;
}

std::optional<PatchPair> sample_patch(const ImageBuffer& lr, const ImageBuffer& hr, int size, int scale,
                                      std::mt19937_64& rng) {
  if (hr.height() != scale * lr.height() || hr.width() != scale * lr.width()) {
    throw ContractViolation("sample_patch: HR must be exactly scale x LR");
  }
  if (lr.height() < size || lr.width() < size) return std::nullopt;
  PatchPair p;
  p.y = static_cast<int>(rng() % static_cast<std::uint64_t>(lr.height() - size + 1));
  p.x = static_cast<int>(rng() % static_cast<std::uint64_t>(lr.width() - size + 1));
  p.transform = static_cast<int>(rng() % 8);
  p.lr = apply_dihedral(crop(lr, p.y, p.x, size, size), p.transform);
  p.hr = apply_dihedral(crop(hr, p.y * scale, p.x * scale, size * scale, size * scale), p.transform);
  return p;
}

Dataset load_dataset(const std::filesystem::path& lr_dir, const std::filesystem::path& hr_dir,
                     const std::filesystem::path& sidecar, std::optional<MetadataLayout> layout,
                     const PCABasis* basis) {
  Dataset data;
  data.layout = layout;
  if (basis) data.pca_digest = basis_digest(*basis);
  for (const auto& record : read_sidecar(sidecar)) {
    TrainingSample s;
    s.name = record.source;
    s.lr = read_png(lr_dir / record.source);
    s.hr = modcrop(read_png(hr_dir / record.source), record.scale);
    if (s.hr.height() != record.scale * s.lr.height() || s.hr.width() != record.scale * s.lr.width()) {
      throw ConfigurationError("'" + record.source + "': LR size does not match HR at scale " +
                               std::to_string(record.scale));
    }
    s.record = record;
    if (layout) {
      s.metadata = encode_metadata(record, layout_uses_kernel(*layout) ? basis : nullptr, *layout);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

void check_compatible(const Network& net, const Dataset& data, const std::optional<std::string>& net_digest) {
  if (!net.config.meta_enabled) return;
  if (!data.layout || *data.layout != net.config.layout) {
    throw ConfigurationError("metadata layout mismatch: network expects " + layout_name(net.config.layout) +
                             ", dataset provides " + (data.layout ? layout_name(*data.layout) : "none"));
  }
  for (const auto& s : data.samples) {
    if (!s.metadata || s.metadata->values.size() != net.config.metadata_dim()) {
      throw ConfigurationError("sample '" + s.name + "' lacks a metadata vector of length " +
                               std::to_string(net.config.metadata_dim()));
    }
  }
  if (layout_uses_kernel(net.config.layout) && net_digest && data.pca_digest && *net_digest != *data.pca_digest) {
    throw ConfigurationError("PCA basis digest mismatch: network trained with " + *net_digest + ", dataset encoded with " +
                             *data.pca_digest);
  }
}

ImageBuffer super_resolve(const Network& net, const ImageBuffer& lr, const MetadataVector* metadata) {
  NoGradGuard no_grad;
  const Tensor m = (net.config.meta_enabled && metadata) ? metadata->tensor() : Tensor{};
  return quantize(tensor_to_image(forward(net, image_to_tensor(lr), m)));
}

ValidationResult validate_network(const Network& net, const Dataset& data, int crop, ColorMode color) {
  ValidationResult result;
  for (const auto& s : data.samples) {
    const ImageBuffer sr = super_resolve(net, s.lr, s.metadata ? &*s.metadata : nullptr);
    const PairMetrics m = evaluate_pair(sr, s.hr, crop, color);
    result.images.push_back({s.name, m.psnr, m.ssim});
    result.psnr += m.psnr;
    result.ssim += m.ssim;
  }
  if (!result.images.empty()) {
    result.psnr /= static_cast<double>(result.images.size());
    result.ssim /= static_cast<double>(result.images.size());
  }
  return result;
}

TrainResult train(const Network& initial, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
                  const TrainObserver& observer) {
  config.validate();
  const std::optional<std::string> digest =
      layout_uses_kernel(initial.config.layout) && initial.config.meta_enabled ? train_set.pca_digest : std::nullopt;
  check_compatible(initial, train_set, digest);
  check_compatible(initial, val_set, digest);
  if (train_set.samples.empty()) throw ConfigurationError("training set is empty");

  const int factor = initial.config.scale;
  const int crop = config.crop >= 0 ? config.crop : factor;
  Network net = clone_network(initial);
  std::vector<Tensor> params = net.parameters();
  AdamState adam;
  std::mt19937_64 rng(config.seed);

  // Pre-encode metadata tensors once.
  std::vector<Tensor> metadata(train_set.samples.size());
  if (net.config.meta_enabled)
    for (std::size_t i = 0; i < metadata.size(); ++i) metadata[i] = train_set.samples[i].metadata->tensor();

  TrainResult result;
  result.best.network = clone_network(net);
  result.best.val_psnr = -std::numeric_limits<double>::infinity();
  result.best.pca_digest = digest;
  bool have_best = false;

  std::vector<std::size_t> order(train_set.samples.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    TraceRow row;
    row.epoch = epoch;
    row.lr = cosine_lr(epoch - 1, config.epochs, config.lr_max, config.lr_min);

    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
        std::vector<PatchPair> patches;
        std::vector<std::size_t> owners;
        for (std::size_t b = start; b < end; ++b) {
          const auto& s = train_set.samples[order[b]];
          auto patch = sample_patch(s.lr, s.hr, config.patch_size, factor, rng);
          if (!patch) {
            std::cerr << "warning: skipping '" << s.name << "', smaller than the training patch\n";
            continue;
          }
          patches.push_back(std::move(*patch));
          owners.push_back(order[b]);
        }
        if (patches.empty()) continue;
        for (auto& p : params) p.zero_grad();
        const double weight = 1.0 / static_cast<double>(patches.size());
        for (std::size_t b = 0; b < patches.size(); ++b) {
          const Tensor pred = forward(net, image_to_tensor(patches[b].lr), metadata[owners[b]]);
          const Tensor loss = l1_loss(pred, image_to_tensor(patches[b].hr));
          backward(scale(loss, weight));
          loss_sum += loss.item();
          ++loss_count;
        }
        std::vector<Eigen::VectorXd> grads;
        grads.reserve(params.size());
        for (const auto& p : params) grads.push_back(p.grad());
        adam_step(params, grads, adam, row.lr, config.adam);
      }
    } catch (const NumericalError& e) {
      std::cerr << "warning: epoch " << epoch << " aborted: " << e.what() << '\n';
    }
    row.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;

    if (epoch % config.val_every == 0 || epoch == config.epochs) {
      const ValidationResult v = validate_network(net, val_set, crop, config.color);
      row.val_psnr = v.psnr;
      row.val_ssim = v.ssim;
      if (!have_best || v.psnr > result.best.val_psnr) {
        have_best = true;
        result.best.network = clone_network(net);
        result.best.epoch = epoch;
        result.best.val_psnr = v.psnr;
      }
    }
    if (observer) observer(row);
    result.trace.push_back(row);
  }
  result.final_network = std::move(net);
  return result;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write trace " + path.string());
  out << "epoch,lr,train_loss,val_psnr,val_ssim\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << format_metric(r.lr) << ',' << format_metric(r.train_loss) << ','
        << (r.val_psnr ? format_metric(*r.val_psnr) : "") << ',' << (r.val_ssim ? format_metric(*r.val_ssim) : "")
        << '\n';
  }
}

}  // namespace metasr
