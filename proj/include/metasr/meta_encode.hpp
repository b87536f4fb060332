#pragma once

// Degradation record -> metadata vector m.
//
// Blur kernels are flattened (441 values for 21x21), mean-centred and
// projected onto a PCA basis fitted on a regenerable corpus; QPI is mapped
// linearly onto [0, 1]. Combined layouts append QPI after the kernel code.

#include "metasr/degrade.hpp"
#include "metasr/tensor.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace metasr {

inline constexpr int kPcaComponents = 10;

struct PcaCorpus {
  std::int64_t count = 0;
  double sigma_min = kSigmaMin;
  double sigma_max = kSigmaMax;
  std::uint64_t seed = 0;
};

struct PCABasis {
  Eigen::VectorXd mean;                // [dim]
  RowMatrixXd components;              // [k, dim], orthonormal rows
  Eigen::VectorXd explained_variance;  // [k], non-increasing
  double total_variance = 0.0;
  int kernel_size = kKernelSize;
  PcaCorpus corpus;

  int dim() const { return static_cast<int>(mean.size()); }
  int k() const { return static_cast<int>(components.rows()); }
  double explained_ratio() const { return total_variance > 0.0 ? explained_variance.sum() / total_variance : 1.0; }
};

/// Kernels with sigma ~ U[sigma_min, sigma_max] drawn from `seed`.
std::vector<BlurKernel> kernel_corpus(std::int64_t count, std::uint64_t seed, double sigma_min = kSigmaMin,
                                      double sigma_max = kSigmaMax, int size = kKernelSize);

/// Top-k principal axes of the mean-centred kernel matrix via SVD. Each
/// component's sign is fixed so its largest-magnitude entry is positive.
PCABasis pca_fit(const std::vector<BlurKernel>& kernels, int k = kPcaComponents, PcaCorpus corpus = {});

Eigen::VectorXd pca_project(const BlurKernel& kernel, const PCABasis& basis);
Eigen::VectorXd pca_reconstruct(const Eigen::VectorXd& code, const PCABasis& basis);

/// (qpi - 20) / 20.
double scale_qpi(int qpi);

enum class MetadataLayout { KernelPca, Qpi, KernelPcaQpi };

std::string layout_name(MetadataLayout layout);
MetadataLayout parse_layout(const std::string& name);
int layout_length(MetadataLayout layout);
bool layout_uses_kernel(MetadataLayout layout);
bool layout_uses_qpi(MetadataLayout layout);

struct MetadataVector {
  Eigen::VectorXd values;
  MetadataLayout layout = MetadataLayout::KernelPca;

  Tensor tensor() const;
};

/// Throws ContractViolation when the record lacks a field the layout needs
/// or the basis presence disagrees with the layout.
MetadataVector encode_metadata(const DegradationRecord& record, const PCABasis* basis, MetadataLayout layout);

// Persisted form: 8-byte magic "MSRPCA01", little-endian u64 header length,
// UTF-8 JSON header, then float64 little-endian mean[dim] followed by
// components[k][dim] in row-major order.
void save_basis(const std::filesystem::path& path, const PCABasis& basis);
PCABasis load_basis(const std::filesystem::path& path);

/// Hex SHA-256 over the numeric payload (mean then components).
std::string basis_digest(const PCABasis& basis);

}  // namespace metasr
