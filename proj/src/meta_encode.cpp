#include "metasr/meta_encode.hpp"

#include "metasr/error.hpp"
#include "metasr/io.hpp"
#include "metasr/nn.hpp"

#include <Eigen/SVD>

#include <random>

namespace metasr {

std::vector<BlurKernel> kernel_corpus(std::int64_t count, std::uint64_t seed, double sigma_min, double sigma_max,
                                      int size) {
  std::mt19937_64 rng(seed);
  std::vector<BlurKernel> kernels;
  kernels.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    kernels.push_back(gaussian_kernel(sigma_min + (sigma_max - sigma_min) * uniform01(rng), size));
  }
  return kernels;
}

PCABasis pca_fit(const std::vector<BlurKernel>& kernels, int k, PcaCorpus corpus) {
  if (k < 1) throw ConfigurationError("pca_fit: k must be >= 1");
  if (static_cast<std::int64_t>(kernels.size()) < k) {
    throw ConfigurationError("pca_fit: " + std::to_string(kernels.size()) + " kernels cannot support " +
                             std::to_string(k) + " components");
  }
  const int size = kernels.front().size();
  const Eigen::Index dim = static_cast<Eigen::Index>(size) * size;
  if (k > dim) throw ConfigurationError("pca_fit: k exceeds kernel dimension");
  const Eigen::Index n = static_cast<Eigen::Index>(kernels.size());

  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (kernels[i].size() != size) throw ConfigurationError("pca_fit: kernels differ in size");
    x.row(i) = kernels[i].flat().transpose();
  }
  PCABasis basis;
  basis.kernel_size = size;
  // Shifting by the first kernel before averaging keeps identical inputs
  // exactly zero after centring.
  const Eigen::RowVectorXd pivot = x.row(0);
  x.rowwise() -= pivot;
  const Eigen::RowVectorXd shift = x.colwise().mean();
  basis.mean = (pivot + shift).transpose();
  x.rowwise() -= shift;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double dof = n > 1 ? static_cast<double>(n - 1) : 1.0;
  // Thin V has min(n, dim) columns; with fewer samples than dimensions the
  // missing axes carry no variance anyway.
  const Eigen::Index available = svd.matrixV().cols();
  if (available < k) {
    throw ConfigurationError("pca_fit: corpus of " + std::to_string(n) + " kernels yields only " +
                             std::to_string(available) + " axes");
  }
  basis.components = svd.matrixV().leftCols(k).transpose();
  basis.explained_variance = sv.head(k).array().square() / dof;
  basis.total_variance = sv.array().square().sum() / dof;
  for (int r = 0; r < k; ++r) {
    Eigen::Index argmax = 0;
    basis.components.row(r).cwiseAbs().maxCoeff(&argmax);
    if (basis.components(r, argmax) < 0.0) basis.components.row(r) *= -1.0;
  }
  corpus.count = n;
  basis.corpus = corpus;
  return basis;
}

Eigen::VectorXd pca_project(const BlurKernel& kernel, const PCABasis& basis) {
  if (kernel.values.size() != basis.dim()) throw ContractViolation("pca_project: kernel size differs from basis");
  return basis.components * (kernel.flat() - basis.mean);
}

Eigen::VectorXd pca_reconstruct(const Eigen::VectorXd& code, const PCABasis& basis) {
  if (code.size() != basis.k()) throw ContractViolation("pca_reconstruct: code length differs from basis rank");
  return basis.mean + basis.components.transpose() * code;
}

double scale_qpi(int qpi) {
  if (qpi < kQpiMin || qpi > kQpiMax) throw ConfigurationError("QPI " + std::to_string(qpi) + " outside [20, 40]");
  return (qpi - kQpiMin) / static_cast<double>(kQpiMax - kQpiMin);
}

std::string layout_name(MetadataLayout layout) {
  switch (layout) {
    case MetadataLayout::KernelPca: return "kernel-pca";
    case MetadataLayout::Qpi: return "qpi";
    case MetadataLayout::KernelPcaQpi: return "kernel-pca+qpi";
  }
  return "kernel-pca";
}

MetadataLayout parse_layout(const std::string& name) {
  if (name == "kernel-pca") return MetadataLayout::KernelPca;
  if (name == "qpi") return MetadataLayout::Qpi;
  if (name == "kernel-pca+qpi") return MetadataLayout::KernelPcaQpi;
  throw ConfigurationError("unknown metadata layout '" + name + "'");
}

bool layout_uses_kernel(MetadataLayout layout) { return layout != MetadataLayout::Qpi; }
bool layout_uses_qpi(MetadataLayout layout) { return layout != MetadataLayout::KernelPca; }

int layout_length(MetadataLayout layout) {
  return (layout_uses_kernel(layout) ? kPcaComponents : 0) + (layout_uses_qpi(layout) ? 1 : 0);
}

Tensor MetadataVector::tensor() const { return Tensor({static_cast<int>(values.size())}, values); }

MetadataVector encode_metadata(const DegradationRecord& record, const PCABasis* basis, MetadataLayout layout) {
  const bool kernel = layout_uses_kernel(layout), qpi = layout_uses_qpi(layout);
  if (kernel != (basis != nullptr)) {
    throw ContractViolation("encode_metadata: a PCA basis is required exactly when the layout has kernel-pca");
  }
  if (kernel && !record.sigma) {
    throw ContractViolation("encode_metadata: layout " + layout_name(layout) + " needs a blur width, record '" +
                            record.source + "' has none");
  }
  if (qpi && !record.qpi) {
    throw ContractViolation("encode_metadata: layout " + layout_name(layout) + " needs a QPI, record '" +
                            record.source + "' has none");
  }
  if (kernel && basis->k() != kPcaComponents) {
    throw ContractViolation("encode_metadata: basis has " + std::to_string(basis->k()) + " components, expected 10");
  }
  MetadataVector m;
  m.layout = layout;
  m.values.resize(layout_length(layout));
  if (kernel) m.values.head(kPcaComponents) = pca_project(gaussian_kernel(*record.sigma, basis->kernel_size), *basis);
  if (qpi) m.values[m.values.size() - 1] = scale_qpi(*record.qpi);
  return m;
}

void save_basis(const std::filesystem::path& path, const PCABasis& basis) {
  FramedFile file;
  file.header = {
      {"dim", basis.dim()},
      {"k", basis.k()},
      {"kernel_size", basis.kernel_size},
      {"count", basis.corpus.count},
      {"seed", basis.corpus.seed},
      {"sigma_min", basis.corpus.sigma_min},
      {"sigma_max", basis.corpus.sigma_max},
      {"explained_variance", std::vector<double>(basis.explained_variance.data(),
                                                 basis.explained_variance.data() + basis.k())},
      {"total_variance", basis.total_variance},
  };
  file.payload.assign(basis.mean.data(), basis.mean.data() + basis.dim());
  file.payload.insert(file.payload.end(), basis.components.data(), basis.components.data() + basis.components.size());
  write_framed(path, "MSRPCA01", file);
}

PCABasis load_basis(const std::filesystem::path& path) {
  FramedFile file = read_framed(path, "MSRPCA01");
  PCABasis basis;
  try {
    const int dim = file.header.at("dim").get<int>();
    const int k = file.header.at("k").get<int>();
    if (file.payload.size() != static_cast<std::size_t>(dim) * (k + 1)) {
      throw ConfigurationError(path.string() + ": payload size disagrees with header");
    }
    basis.kernel_size = file.header.at("kernel_size").get<int>();
    basis.corpus.count = file.header.at("count").get<std::int64_t>();
    basis.corpus.seed = file.header.at("seed").get<std::uint64_t>();
    basis.corpus.sigma_min = file.header.at("sigma_min").get<double>();
    basis.corpus.sigma_max = file.header.at("sigma_max").get<double>();
    basis.total_variance = file.header.at("total_variance").get<double>();
    const auto ev = file.header.at("explained_variance").get<std::vector<double>>();
    basis.explained_variance = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
    basis.mean = Eigen::Map<const Eigen::VectorXd>(file.payload.data(), dim);
    basis.components = Eigen::Map<const RowMatrixXd>(file.payload.data() + dim, k, dim);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(path.string() + ": bad PCA header: " + e.what());
  }
  return basis;
}

std::string basis_digest(const PCABasis& basis) {
  std::vector<double> payload(basis.mean.data(), basis.mean.data() + basis.dim());
  payload.insert(payload.end(), basis.components.data(), basis.components.data() + basis.components.size());
  return sha256_hex(std::span<const double>(payload));
}

}  // namespace metasr
