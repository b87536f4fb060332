#pragma once

// Dense double-precision tensors with tape-style reverse-mode autodiff.
//
// A Tensor is a shared handle: copies alias the same storage, like a
// framework tensor. Operations build the graph eagerly whenever one of
// their inputs requires a gradient; backward() walks it once in reverse
// topological order. The graph is owned by the tensors that reference it
// and disappears with the last handle to the loss.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace metasr {

using Shape = std::vector<int>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

class Tensor;

namespace detail {

struct GraphNode;

struct TensorImpl {
  Shape shape;
  Eigen::VectorXd data;
  Eigen::VectorXd grad;  // empty until the first backward reaches a leaf
  bool requires_grad = false;
  std::shared_ptr<GraphNode> node;
};

struct GraphNode {
  const char* op = "";
  std::vector<std::shared_ptr<TensorImpl>> parents;
  // Receives dL/d(output) and returns dL/d(parent) for every parent, in
  // order. Entries for parents that do not require grad may be empty.
  std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> backward;
};

}  // namespace detail

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, Eigen::VectorXd values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::initializer_list<double> values,
                            bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const;
  int dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  Eigen::Index numel() const;

  const Eigen::VectorXd& values() const;
  /// Mutable access for parameter updates and finite-difference probes.
  /// Mutating a tensor that participates in a live graph invalidates it.
  Eigen::VectorXd& mutable_values();
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  const Eigen::VectorXd& grad() const;
  void zero_grad();

  /// Same values, no graph, no gradient.
  Tensor detach() const;
  /// Deep copy of the values into a fresh leaf.
  Tensor clone(bool requires_grad = false) const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

  // Graph plumbing used by the operations; not part of the user surface.
  static Tensor from_impl(std::shared_ptr<detail::TensorImpl> impl);
  const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// While alive on a thread, operations on that thread record no graph.
/// Used for inference and validation passes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Populates grad() of every leaf that requires a gradient with
/// d(loss)/d(leaf). Leaf gradients accumulate across calls until zero_grad().
void backward(const Tensor& loss);

// ---- differentiable operations -------------------------------------------

/// 2-D cross-correlation of a [C_in,H,W] input with [C_out,C_in,k,k]
/// weights, zero padding on all sides.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding);

/// weight[d_out,d_in] * input[d_in] + bias[d_out].
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

/// Subgradient 0 at exactly x == 0.
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// out[c,y,x] = w[c] * features[c,y,x].
Tensor channel_scale(const Tensor& features, const Tensor& w);

/// [C*r*r,H,W] -> [C,r*H,r*W]; out[c, r*y+a, r*x+b] = in[c*r*r + a*r + b, y, x].
Tensor pixel_shuffle(const Tensor& x, int r);
/// Exact inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& x, int r);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sum(const Tensor& a);

/// Mean absolute difference; subgradient 0 where pred == target.
Tensor l1_loss(const Tensor& pred, const Tensor& target);

// ---- gradient checking ---------------------------------------------------

using ScalarFunction = std::function<Tensor(std::span<const Tensor>)>;

/// Largest |analytic - central difference| / max(|analytic|, |cd|, 1e-8) over
/// every element of every input that requires a gradient. Input values are
/// restored before returning; their grads are left zeroed.
double grad_check(const ScalarFunction& fn, std::span<const Tensor> inputs, double eps = 1e-5);

}  // namespace metasr
