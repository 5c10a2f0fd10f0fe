// Copyright 2026 The MC-CNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCCNN_TENSOR_HPP_
#define MCCNN_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mccnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {
struct TensorImpl;
}  // namespace detail

/// Receives the gradient of the op output and accumulates into the gradient
/// buffers of its inputs. An input that does not need a gradient is handed an
/// empty span and must be skipped.
using BackwardFn = std::function<void(std::span<const double> out_grad,
                                      std::span<const std::span<double>> in_grads)>;

/// Dense row-major float64 array with optional reverse-mode gradient.
///
/// A Tensor is a shared handle: copies alias the same storage. Tensors created
/// directly are leaves; tensors produced by ops while gradient recording is
/// enabled remember the op that produced them, which forms the compute graph
/// walked by backward().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  /// Writable view of a leaf's values. Throws UsageError on op results.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t index) const { return data()[index]; }

  bool requires_grad() const;
  void set_requires_grad(bool value);
  bool is_leaf() const;
  /// Name of the producing op, or "leaf".
  std::string_view op_name() const;

  bool has_grad() const;
  /// Accumulated gradient; empty when none has been written yet.
  std::span<const double> grad() const;
  /// Sets the gradient to zero. Gradients accumulate across backward() calls
  /// until this is called.
  void zero_grad();

  /// Back-propagates from this scalar into every leaf that requires a
  /// gradient. Throws UsageError when the tensor is not the output of a
  /// recorded op or is not a scalar.
  void backward() const;

  /// Leaf copy of the values, detached from any graph.
  Tensor detach() const;

  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

  /// Builds the result of an op. Records `backward` in the graph when
  /// recording is enabled and any input requires a gradient.
  static Tensor from_op(Shape shape, std::vector<double> values, std::string_view op,
                        std::vector<Tensor> inputs, BackwardFn backward);

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  const detail::TensorImpl& impl() const;
  detail::TensorImpl& impl();

  std::shared_ptr<detail::TensorImpl> impl_;

  friend struct GraphAccess;
};

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_recording_enabled() noexcept;

struct GraphNode {
  std::string op;
  Shape shape;
  std::vector<std::size_t> inputs;  // indices of earlier nodes
};

/// The graph reachable from a root, leaves included, in topological order.
struct ComputeGraph {
  std::vector<GraphNode> nodes;
};

ComputeGraph trace_graph(const Tensor& root);

}  // namespace mccnn

#endif  // MCCNN_TENSOR_HPP_
