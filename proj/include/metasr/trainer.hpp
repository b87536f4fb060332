#pragma once

// Patch-based training: one random LR patch (with a random dihedral
// augmentation) per training image per epoch, mean-L1 loss, Adam with an
// epoch-wise cosine-annealed learning rate, and model selection on the
// best validation PSNR.

#include "metasr/degrade.hpp"
#include "metasr/image.hpp"
#include "metasr/meta_encode.hpp"
#include "metasr/metrics.hpp"
#include "metasr/srnet.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace metasr {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 200;
  int patch_size = 64;
  double lr_max = 1e-4;
  double lr_min = 1e-7;
  AdamHyper adam;
  int batch_size = 8;
  std::uint64_t seed = 0;
  int val_every = 10;
  int crop = -1;  // -1 selects the network scale
  ColorMode color = ColorMode::Luma;

  void validate() const;
};

struct AdamState {
  std::vector<Eigen::VectorXd> first_moment;
  std::vector<Eigen::VectorXd> second_moment;
  std::int64_t step = 0;
};

/// One Adam update with bias-corrected moments. Throws NumericalError, and
/// leaves params and state untouched, if any gradient is non-finite.
void adam_step(std::span<Tensor> params, std::span<const Eigen::VectorXd> grads, AdamState& state, double lr,
               const AdamHyper& hyper = {});

/// eta_min + (eta_max - eta_min) * (1 + cos(pi * epoch / total)) / 2.
double cosine_lr(int epoch, int total, double lr_max, double lr_min);

/// Dihedral group element: bit 2 selects a horizontal flip applied first,
/// bits 0-1 count subsequent 90 degree counter-clockwise turns.
ImageBuffer apply_dihedral(const ImageBuffer& image, int element);
ImageBuffer invert_dihedral(const ImageBuffer& image, int element);

struct PatchPair {
  ImageBuffer lr;
  ImageBuffer hr;
  int y = 0;  // LR offset
  int x = 0;
  int transform = 0;
};

/// Uniform LR offset, the aligned scale-times-larger HR window, and one
/// shared random dihedral transform. Empty when the LR image is smaller
/// than the patch.
std::optional<PatchPair> sample_patch(const ImageBuffer& lr, const ImageBuffer& hr, int size, int scale,
                                      std::mt19937_64& rng);

struct TrainingSample {
  std::string name;
  ImageBuffer lr;
  ImageBuffer hr;
  std::optional<MetadataVector> metadata;
  std::optional<DegradationRecord> record;
};

struct Dataset {
  std::vector<TrainingSample> samples;
  std::optional<MetadataLayout> layout;
  std::optional<std::string> pca_digest;
};

/// Pairs LR/HR PNGs by file name using the sidecar's `source` field and, for
/// a given layout, encodes every record's metadata.
Dataset load_dataset(const std::filesystem::path& lr_dir, const std::filesystem::path& hr_dir,
                     const std::filesystem::path& sidecar, std::optional<MetadataLayout> layout,
                     const PCABasis* basis);

/// Throws ConfigurationError when a meta network cannot consume the
/// dataset's metadata (layout, length, or PCA basis digest).
void check_compatible(const Network& net, const Dataset& data, const std::optional<std::string>& net_digest);

/// Network output as an 8-bit image.
ImageBuffer super_resolve(const Network& net, const ImageBuffer& lr, const MetadataVector* metadata);

struct ValidationResult {
  double psnr = 0.0;
  double ssim = 0.0;
  std::vector<ImageMetrics> images;
};

ValidationResult validate_network(const Network& net, const Dataset& data, int crop, ColorMode color);

struct TraceRow {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_psnr;
  std::optional<double> val_ssim;
};

struct TrainResult {
  Checkpoint best;
  std::vector<TraceRow> trace;
  Network final_network;
};

using TrainObserver = std::function<void(const TraceRow&)>;

/// Trains a copy of `initial`; the argument is not modified.
TrainResult train(const Network& initial, const Dataset& train_set, const Dataset& val_set, const TrainConfig& config,
                  const TrainObserver& observer = {});

/// Columns: epoch,lr,train_loss,val_psnr,val_ssim (validation cells empty on
/// epochs without validation).
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

}  // namespace metasr
