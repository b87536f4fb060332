#include "metasr/tensor.hpp"

#include "metasr/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace metasr {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
  for (int extent : shape) {
    if (extent <= 0) throw ContractViolation("tensor extents must be positive, got " + shape_string(shape));
  }
}

using detail::GraphNode;
using detail::TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;
using BackwardFn = std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)>;

thread_local bool g_grad_enabled = true;

bool any_requires_grad(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t->requires_grad(); });
}

// Wraps a freshly computed value; attaches a graph node when any parent
// participates in differentiation.
Tensor make_result(Shape shape, Eigen::VectorXd values, const char* op,
                   std::initializer_list<const Tensor*> parents, BackwardFn fn) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  if (any_requires_grad(parents)) {
    impl->requires_grad = true;
    auto node = std::make_shared<GraphNode>();
    node->op = op;
    for (const Tensor* p : parents) node->parents.push_back(p->impl());
    node->backward = std::move(fn);
    impl->node = std::move(node);
  }
  return Tensor::from_impl(std::move(impl));
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ContractViolation(std::string(op) + ": undefined tensor argument");
}

using RowMap = Eigen::Map<RowMatrixXd>;
using ConstRowMap = Eigen::Map<const RowMatrixXd>;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

// ---- Tensor ----------------------------------------------------------------

Tensor::Tensor(Shape shape, bool requires_grad) : impl_(std::make_shared<detail::TensorImpl>()) {
  validate_shape(shape);
  impl_->data = Eigen::VectorXd::Zero(shape_numel(shape));
  impl_->shape = std::move(shape);
  impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, Eigen::VectorXd values, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  validate_shape(shape);
  if (values.size() != shape_numel(shape)) {
    throw ContractViolation("tensor " + shape_string(shape) + " needs " +
                            std::to_string(shape_numel(shape)) + " values, got " +
                            std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return Tensor(std::move(shape), requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  t.impl_->data.setConstant(value);
  return t;
}

Tensor Tensor::from_values(Shape shape, std::initializer_list<double> values, bool requires_grad) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), v.data());
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::from_impl(std::shared_ptr<detail::TensorImpl> impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

const Shape& Tensor::shape() const { return impl_->shape; }

int Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) throw ContractViolation("axis out of range for " + shape_string(impl_->shape));
  return impl_->shape[axis];
}

Eigen::Index Tensor::numel() const { return impl_->data.size(); }
const Eigen::VectorXd& Tensor::values() const { return impl_->data; }
Eigen::VectorXd& Tensor::mutable_values() { return impl_->data; }

double Tensor::item() const {
  if (numel() != 1) throw ContractViolation("item() on tensor of shape " + shape_string(shape()));
  return impl_->data[0];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool flag) { impl_->requires_grad = flag; }
bool Tensor::has_grad() const { return impl_->grad.size() == impl_->data.size(); }

const Eigen::VectorXd& Tensor::grad() const {
  if (!has_grad()) impl_->grad = Eigen::VectorXd::Zero(impl_->data.size());
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad = Eigen::VectorXd::Zero(impl_->data.size()); }

Tensor Tensor::detach() const { return Tensor(impl_->shape, impl_->data, false); }
Tensor Tensor::clone(bool requires_grad) const { return Tensor(impl_->shape, impl_->data, requires_grad); }

// ---- backward ----------------------------------------------------------------

void backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.numel() != 1) {
    throw ContractViolation("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; reversed, it is a topological order.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack{{loss.impl().get(), 0}};
  visited.insert(loss.impl().get());
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    if (impl->node && next < impl->node->parents.size()) {
      TensorImpl* parent = impl->node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
      continue;
    }
    order.push_back(impl);
    stack.pop_back();
  }

  std::unordered_map<TensorImpl*, Eigen::VectorXd> pending;
  pending[loss.impl().get()] = Eigen::VectorXd::Ones(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* impl = *it;
    auto found = pending.find(impl);
    if (found == pending.end()) continue;
    Eigen::VectorXd upstream = std::move(found->second);
    pending.erase(found);

    if (!impl->node) {
      if (impl->grad.size() != impl->data.size()) impl->grad = Eigen::VectorXd::Zero(impl->data.size());
      impl->grad += upstream;
      continue;
    }
    std::vector<Eigen::VectorXd> grads = impl->node->backward(upstream);
    for (std::size_t i = 0; i < impl->node->parents.size(); ++i) {
      TensorImpl* parent = impl->node->parents[i].get();
      if (!parent->requires_grad || grads[i].size() == 0) continue;
      auto [slot, inserted] = pending.try_emplace(parent, std::move(grads[i]));
      if (!inserted) slot->second += grads[i];
    }
  }
}

// ---- operations ------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding) {
  require_defined(input, "conv2d");
  require_defined(weight, "conv2d");
  require_defined(bias, "conv2d");
  if (input.rank() != 3 || weight.rank() != 4 || bias.rank() != 1) {
    throw ContractViolation("conv2d expects input [C,H,W], weight [O,C,k,k], bias [O]; got " +
                            shape_string(input.shape()) + ", " + shape_string(weight.shape()) + ", " +
                            shape_string(bias.shape()));
  }
  const int c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const int c_out = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != c_in) {
    throw ContractViolation("conv2d: input has " + std::to_string(c_in) + " channels, weight expects " +
                            std::to_string(weight.dim(1)));
  }
  if (bias.dim(0) != c_out) throw ContractViolation("conv2d: bias length differs from output channels");
  if (weight.dim(3) != k || k % 2 == 0) {
    throw ConfigurationError("conv2d: kernel must be square with odd size, got " + shape_string(weight.shape()));
  }
  if (padding < 0) throw ConfigurationError("conv2d: negative padding");
  const int h_out = h + 2 * padding - k + 1;
  const int w_out = w + 2 * padding - k + 1;
  if (h_out < 1 || w_out < 1) throw ConfigurationError("conv2d: kernel larger than padded input");

  // The input is zero-padded once. Output is computed on the padded-width
  // grid (row stride wp), so each kernel tap (i, j) becomes one GEMM against
  // a strided view of the padded input starting at offset i*wp + j. The
  // trailing wp - w_out columns of each output row are scratch.
  const int hp = h + 2 * padding, wp = w + 2 * padding;
  const Eigen::Index plane = static_cast<Eigen::Index>(hp) * wp;
  const Eigen::Index grid = static_cast<Eigen::Index>(h_out) * wp;
  auto padded = std::make_shared<Eigen::VectorXd>(Eigen::VectorXd::Zero(c_in * plane + k));
  for (int c = 0; c < c_in; ++c)
    for (int y = 0; y < h; ++y) {
      const double* src = input.values().data() + (static_cast<Eigen::Index>(c) * h + y) * w;
      std::copy(src, src + w, padded->data() + c * plane + static_cast<Eigen::Index>(y + padding) * wp + padding);
    }

  // taps[i*k + j] is the [c_out, c_in] slice weight[:, :, i, j].
  auto tap_matrices = [c_out, c_in, k](const Eigen::VectorXd& wv) {
    std::vector<RowMatrixXd> taps(static_cast<std::size_t>(k) * k, RowMatrixXd(c_out, c_in));
    for (int o = 0; o < c_out; ++o)
      for (int c = 0; c < c_in; ++c)
        for (int t = 0; t < k * k; ++t) taps[t](o, c) = wv[(static_cast<Eigen::Index>(o) * c_in + c) * k * k + t];
    return taps;
  };
  using StridedView = Eigen::Map<RowMatrixXd, 0, Eigen::OuterStride<>>;
  using ConstStridedView = Eigen::Map<const RowMatrixXd, 0, Eigen::OuterStride<>>;

  RowMatrixXd full = bias.values().replicate(1, grid);
  {
    const auto taps = tap_matrices(weight.values());
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        ConstStridedView view(padded->data() + static_cast<Eigen::Index>(i) * wp + j, c_in, grid,
                              Eigen::OuterStride<>(plane));
        full.noalias() += taps[i * k + j] * view;
      }
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(c_out) * h_out * w_out);
  for (int o = 0; o < c_out; ++o)
    for (int y = 0; y < h_out; ++y) {
      const double* src = full.row(o).data() + static_cast<Eigen::Index>(y) * wp;
      std::copy(src, src + w_out, out.data() + (static_cast<Eigen::Index>(o) * h_out + y) * w_out);
    }

  const bool need_input = input.requires_grad();
  const bool need_weight = weight.requires_grad();
  Tensor weight_ref = weight;
  BackwardFn fn = [=](const Eigen::VectorXd& upstream) {
    std::vector<Eigen::VectorXd> grads(3);
    RowMatrixXd g = RowMatrixXd::Zero(c_out, grid);
    for (int o = 0; o < c_out; ++o)
      for (int y = 0; y < h_out; ++y) {
        const double* src = upstream.data() + (static_cast<Eigen::Index>(o) * h_out + y) * w_out;
        std::copy(src, src + w_out, g.row(o).data() + static_cast<Eigen::Index>(y) * wp);
      }
    if (need_weight) {
      Eigen::VectorXd dw(static_cast<Eigen::Index>(c_out) * c_in * k * k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          ConstStridedView view(padded->data() + static_cast<Eigen::Index>(i) * wp + j, c_in, grid,
                                Eigen::OuterStride<>(plane));
          const RowMatrixXd tap = g * view.transpose();
          for (int o = 0; o < c_out; ++o)
            for (int c = 0; c < c_in; ++c)
              dw[(static_cast<Eigen::Index>(o) * c_in + c) * k * k + i * k + j] = tap(o, c);
        }
      grads[1] = std::move(dw);
    }
    if (need_input) {
      const auto taps = tap_matrices(weight_ref.values());
      Eigen::VectorXd dpad = Eigen::VectorXd::Zero(c_in * plane + k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          StridedView view(dpad.data() + static_cast<Eigen::Index>(i) * wp + j, c_in, grid,
                           Eigen::OuterStride<>(plane));
          view.noalias() += taps[i * k + j].transpose() * g;
        }
      Eigen::VectorXd din(static_cast<Eigen::Index>(c_in) * h * w);
      for (int c = 0; c < c_in; ++c)
        for (int y = 0; y < h; ++y) {
          const double* src = dpad.data() + c * plane + static_cast<Eigen::Index>(y + padding) * wp + padding;
          std::copy(src, src + w, din.data() + (static_cast<Eigen::Index>(c) * h + y) * w);
        }
      grads[0] = std::move(din);
    }
    grads[2] = g.rowwise().sum();
    return grads;
  };
  return make_result({c_out, h_out, w_out}, std::move(out), "conv2d", {&input, &weight, &bias}, std::move(fn));
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require_defined(input, "linear");
  require_defined(weight, "linear");
  require_defined(bias, "linear");
  if (input.rank() != 1 || weight.rank() != 2 || bias.rank() != 1) {
    throw ContractViolation("linear expects input [d_in], weight [d_out,d_in], bias [d_out]");
  }
  const int d_in = input.dim(0), d_out = weight.dim(0);
  if (weight.dim(1) != d_in || bias.dim(0) != d_out) {
    throw ContractViolation("linear: dimension mismatch, input " + shape_string(input.shape()) + ", weight " +
                            shape_string(weight.shape()) + ", bias " + shape_string(bias.shape()));
  }
  ConstRowMap w(weight.values().data(), d_out, d_in);
  Eigen::VectorXd out = w * input.values() + bias.values();

  Tensor in_ref = input, w_ref = weight;
  BackwardFn fn = [=](const Eigen::VectorXd& g) {
    std::vector<Eigen::VectorXd> grads(3);
    ConstRowMap wm(w_ref.values().data(), d_out, d_in);
    grads[0] = wm.transpose() * g;
    Eigen::VectorXd dw(static_cast<Eigen::Index>(d_out) * d_in);
    RowMap(dw.data(), d_out, d_in).noalias() = g * in_ref.values().transpose();
    grads[1] = std::move(dw);
    grads[2] = g;
    return grads;
  };
  return make_result({d_out}, std::move(out), "linear", {&input, &weight, &bias}, std::move(fn));
}

Tensor relu(const Tensor& x) {
  require_defined(x, "relu");
  Eigen::VectorXd out = x.values().cwiseMax(0.0);
  Tensor x_ref = x;
  BackwardFn fn = [x_ref](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{(x_ref.values().array() > 0.0).select(g, 0.0)};
  };
  return make_result(x.shape(), std::move(out), "relu", {&x}, std::move(fn));
}

Tensor sigmoid(const Tensor& x) {
  require_defined(x, "sigmoid");
  Eigen::VectorXd out = x.values().unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  Eigen::VectorXd saved = out;
  BackwardFn fn = [saved](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{g.array() * saved.array() * (1.0 - saved.array())};
  };
  return make_result(x.shape(), std::move(out), "sigmoid", {&x}, std::move(fn));
}

Tensor channel_scale(const Tensor& features, const Tensor& w) {
  require_defined(features, "channel_scale");
  require_defined(w, "channel_scale");
  if (features.rank() != 3 || w.rank() != 1 || w.dim(0) != features.dim(0)) {
    throw ContractViolation("channel_scale: features " + shape_string(features.shape()) +
                            " incompatible with weights " + shape_string(w.shape()));
  }
  const int c = features.dim(0);
  const Eigen::Index plane = static_cast<Eigen::Index>(features.dim(1)) * features.dim(2);
  Eigen::VectorXd out(features.numel());
  RowMap(out.data(), c, plane) = w.values().asDiagonal() * ConstRowMap(features.values().data(), c, plane);

  Tensor f_ref = features, w_ref = w;
  BackwardFn fn = [=](const Eigen::VectorXd& upstream) {
    ConstRowMap g(upstream.data(), c, plane);
    ConstRowMap f(f_ref.values().data(), c, plane);
    std::vector<Eigen::VectorXd> grads(2);
    grads[0].resize(upstream.size());
    RowMap(grads[0].data(), c, plane) = w_ref.values().asDiagonal() * g;
    grads[1] = g.cwiseProduct(f).rowwise().sum();
    return grads;
  };
  return make_result(features.shape(), std::move(out), "channel_scale", {&features, &w}, std::move(fn));
}

namespace {

// Index of shuffled output element for input element (ci, y, x).
struct ShuffleGeometry {
  int c_in, h, w, r;
  Eigen::Index out_index(int ci, int y, int x) const {
    const int c = ci / (r * r), a = (ci / r) % r, b = ci % r;
    const Eigen::Index oh = static_cast<Eigen::Index>(h) * r, ow = static_cast<Eigen::Index>(w) * r;
    return (c * oh + (static_cast<Eigen::Index>(r) * y + a)) * ow + (static_cast<Eigen::Index>(r) * x + b);
  }
  Eigen::Index in_index(int ci, int y, int x) const {
    return (static_cast<Eigen::Index>(ci) * h + y) * w + x;
  }
};

// forward=true gathers input -> shuffled layout; false scatters back.
Eigen::VectorXd shuffle_values(const Eigen::VectorXd& src, const ShuffleGeometry& geo, bool forward) {
  Eigen::VectorXd dst(src.size());
  for (int ci = 0; ci < geo.c_in; ++ci)
    for (int y = 0; y < geo.h; ++y)
      for (int x = 0; x < geo.w; ++x) {
        const Eigen::Index i = geo.in_index(ci, y, x), o = geo.out_index(ci, y, x);
        if (forward) dst[o] = src[i];
        else dst[i] = src[o];
      }
  return dst;
}

}  // namespace

Tensor pixel_shuffle(const Tensor& x, int r) {
  require_defined(x, "pixel_shuffle");
  if (x.rank() != 3) throw ContractViolation("pixel_shuffle expects [C,H,W]");
  if (r < 1 || x.dim(0) % (r * r) != 0) {
    throw ConfigurationError("pixel_shuffle: " + std::to_string(x.dim(0)) + " channels not divisible by r^2 = " +
                             std::to_string(r * r));
  }
  const ShuffleGeometry geo{x.dim(0), x.dim(1), x.dim(2), r};
  BackwardFn fn = [geo](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{shuffle_values(g, geo, false)};
  };
  return make_result({x.dim(0) / (r * r), x.dim(1) * r, x.dim(2) * r}, shuffle_values(x.values(), geo, true),
                     "pixel_shuffle", {&x}, std::move(fn));
}

Tensor pixel_unshuffle(const Tensor& x, int r) {
  require_defined(x, "pixel_unshuffle");
  if (x.rank() != 3) throw ContractViolation("pixel_unshuffle expects [C,H,W]");
  if (r < 1 || x.dim(1) % r != 0 || x.dim(2) % r != 0) {
    throw ConfigurationError("pixel_unshuffle: spatial extents not divisible by r");
  }
  const ShuffleGeometry geo{x.dim(0) * r * r, x.dim(1) / r, x.dim(2) / r, r};
  BackwardFn fn = [geo](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{shuffle_values(g, geo, true)};
  };
  return make_result({geo.c_in, geo.h, geo.w}, shuffle_values(x.values(), geo, false), "pixel_unshuffle", {&x},
                     std::move(fn));
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  if (a.shape() != b.shape()) {
    throw ContractViolation("add: shape " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  BackwardFn fn = [](const Eigen::VectorXd& g) { return std::vector<Eigen::VectorXd>{g, g}; };
  return make_result(a.shape(), a.values() + b.values(), "add", {&a, &b}, std::move(fn));
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  if (a.shape() != b.shape()) {
    throw ContractViolation("mul: shape " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor a_ref = a, b_ref = b;
  BackwardFn fn = [a_ref, b_ref](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{g.cwiseProduct(b_ref.values()), g.cwiseProduct(a_ref.values())};
  };
  return make_result(a.shape(), a.values().cwiseProduct(b.values()), "mul", {&a, &b}, std::move(fn));
}

Tensor scale(const Tensor& a, double factor) {
  require_defined(a, "scale");
  BackwardFn fn = [factor](const Eigen::VectorXd& g) { return std::vector<Eigen::VectorXd>{g * factor}; };
  return make_result(a.shape(), a.values() * factor, "scale", {&a}, std::move(fn));
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  const Eigen::Index n = a.numel();
  BackwardFn fn = [n](const Eigen::VectorXd& g) {
    return std::vector<Eigen::VectorXd>{Eigen::VectorXd::Constant(n, g[0])};
  };
  return make_result({1}, Eigen::VectorXd::Constant(1, a.values().sum()), "sum", {&a}, std::move(fn));
}

Tensor l1_loss(const Tensor& pred, const Tensor& target) {
  require_defined(pred, "l1_loss");
  require_defined(target, "l1_loss");
  if (pred.shape() != target.shape()) {
    throw ContractViolation("l1_loss: prediction " + shape_string(pred.shape()) + " vs target " +
                            shape_string(target.shape()));
  }
  Eigen::VectorXd diff = pred.values() - target.values();
  const double n = static_cast<double>(diff.size());
  const double loss = diff.cwiseAbs().sum() / n;
  BackwardFn fn = [diff, n](const Eigen::VectorXd& g) {
    Eigen::VectorXd sign = diff.unaryExpr([](double d) { return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); });
    Eigen::VectorXd gp = sign * (g[0] / n);
    Eigen::VectorXd gt = -gp;
    return std::vector<Eigen::VectorXd>{std::move(gp), std::move(gt)};
  };
  return make_result({1}, Eigen::VectorXd::Constant(1, loss), "l1_loss", {&pred, &target}, std::move(fn));
}

// ---- grad_check ------------------------------------------------------------

double grad_check(const ScalarFunction& fn, std::span<const Tensor> inputs, double eps) {
  std::vector<Tensor> probes(inputs.begin(), inputs.end());
  for (auto& t : probes) if (t.requires_grad()) t.zero_grad();
  Tensor loss = fn(probes);
  backward(loss);

  double worst = 0.0;
  for (auto& t : probes) {
    if (!t.requires_grad()) continue;
    const Eigen::VectorXd analytic = t.grad();
    Eigen::VectorXd& values = t.mutable_values();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = fn(probes).item();
      values[i] = saved - eps;
      const double down = fn(probes).item();
      values[i] = saved;
      const double central = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(analytic[i]), std::abs(central), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - central) / denom);
    }
    t.zero_grad();
  }
  return worst;
}

}  // namespace metasr
