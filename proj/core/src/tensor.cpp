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

#include "mccnn/tensor.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "mccnn/error.hpp"

namespace mccnn {

namespace detail {

struct Node {
  std::string_view op;
  std::vector<std::shared_ptr<TensorImpl>> inputs;
  BackwardFn backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::unique_ptr<Node> node;  // null for leaves
};

}  // namespace detail

namespace {

thread_local bool g_grad_enabled = true;

using ImplPtr = std::shared_ptr<detail::TensorImpl>;

bool needs_grad(const detail::TensorImpl& t) { return t.requires_grad || t.node != nullptr; }

// Post-order DFS over op results, so every node follows its inputs.
std::vector<detail::TensorImpl*> topological_ops(detail::TensorImpl* root) {
  std::vector<detail::TensorImpl*> order;
  std::unordered_map<const detail::TensorImpl*, bool> visited;
  std::vector<std::pair<detail::TensorImpl*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited[root] = true;
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    if (impl->node && next < impl->node->inputs.size()) {
      detail::TensorImpl* child = impl->node->inputs[next++].get();
      if (child->node && !visited[child]) {
        visited[child] = true;
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order.push_back(impl);
    stack.pop_back();
  }
  return order;
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, bool requires_grad)
    : Tensor(std::move(shape), std::vector<double>{}, requires_grad) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : impl_(std::make_shared<detail::TensorImpl>()) {
  const std::size_t n = shape_numel(shape);
  if (values.empty()) values.assign(n, 0.0);
  if (values.size() != n) {
    throw DimensionError("tensor of shape " + shape_to_string(shape) + " needs " +
                         std::to_string(n) + " values, got " + std::to_string(values.size()));
  }
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{1}, std::vector<double>{value}, requires_grad);
}

const detail::TensorImpl& Tensor::impl() const {
  if (!impl_) throw UsageError("use of an undefined tensor");
  return *impl_;
}

detail::TensorImpl& Tensor::impl() {
  if (!impl_) throw UsageError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_to_string(s));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return impl().data.size(); }

std::span<const double> Tensor::data() const { return impl().data; }

std::span<double> Tensor::mutable_data() {
  if (impl().node) throw UsageError("mutable_data() on the result of op " + std::string(impl().node->op));
  return impl().data;
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  return impl().data[0];
}

bool Tensor::requires_grad() const { return needs_grad(impl()); }

void Tensor::set_requires_grad(bool value) {
  if (impl().node) throw UsageError("requires_grad can only be set on leaves");
  impl().requires_grad = value;
}

bool Tensor::is_leaf() const { return impl().node == nullptr; }

std::string_view Tensor::op_name() const { return impl().node ? impl().node->op : "leaf"; }

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const { return impl().grad; }

void Tensor::zero_grad() {
  auto& t = impl();
  if (!t.grad.empty()) std::fill(t.grad.begin(), t.grad.end(), 0.0);
}

Tensor Tensor::detach() const { return Tensor(shape(), impl().data, false); }

Tensor Tensor::from_op(Shape shape, std::vector<double> values, std::string_view op,
                       std::vector<Tensor> inputs, BackwardFn backward) {
  Tensor out(std::move(shape), std::move(values), false);
  if (!g_grad_enabled) return out;
  const bool any = std::any_of(inputs.begin(), inputs.end(),
                               [](const Tensor& t) { return needs_grad(t.impl()); });
  if (!any) return out;
  auto node = std::make_unique<detail::Node>();
  node->op = op;
  node->inputs.reserve(inputs.size());
  for (auto& in : inputs) node->inputs.push_back(std::move(in.impl_));
  node->backward = std::move(backward);
  out.impl_->node = std::move(node);
  return out;
}

void Tensor::backward() const {
  auto* root = impl_.get();
  if (!root || !root->node) {
    throw UsageError("backward() called on a tensor that is not attached to a compute graph");
  }
  if (root->data.size() != 1) {
    throw UsageError("backward() needs a scalar, got shape " + shape_to_string(root->shape));
  }

  const auto order = topological_ops(root);
  std::unordered_map<const detail::TensorImpl*, std::size_t> slot;
  slot.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) slot[order[i]] = i;

  // Intermediate gradients live only for the duration of this call, so
  // repeated backward() passes accumulate into leaves exactly once each.
  std::vector<std::vector<double>> grads(order.size());
  grads.back().assign(1, 1.0);

  std::vector<std::span<double>> in_grads;
  for (std::size_t i = order.size(); i-- > 0;) {
    auto* t = order[i];
    auto& out_grad = grads[i];
    if (out_grad.empty()) continue;
    in_grads.clear();
    for (const auto& input : t->node->inputs) {
      if (input->node) {
        auto& g = grads[slot.at(input.get())];
        if (g.empty()) g.assign(input->data.size(), 0.0);
        in_grads.emplace_back(g);
      } else if (input->requires_grad) {
        if (input->grad.empty()) input->grad.assign(input->data.size(), 0.0);
        in_grads.emplace_back(input->grad);
      } else {
        in_grads.emplace_back();
      }
    }
    t->node->backward(out_grad, in_grads);
    std::vector<double>().swap(out_grad);
  }
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_recording_enabled() noexcept { return g_grad_enabled; }

struct GraphAccess {
  static const ImplPtr& impl(const Tensor& t) { return t.impl_; }
};

ComputeGraph trace_graph(const Tensor& root) {
  ComputeGraph graph;
  const auto& root_impl = GraphAccess::impl(root);
  if (!root_impl) return graph;
  std::unordered_map<const detail::TensorImpl*, std::size_t> index;
  std::vector<std::pair<const detail::TensorImpl*, std::size_t>> stack;
  stack.emplace_back(root_impl.get(), 0);
  while (!stack.empty()) {
    auto& [impl, next] = stack.back();
    const std::size_t n_inputs = impl->node ? impl->node->inputs.size() : 0;
    if (next < n_inputs) {
      const detail::TensorImpl* child = impl->node->inputs[next++].get();
      if (!index.contains(child)) stack.emplace_back(child, 0);
      continue;
    }
    if (!index.contains(impl)) {
      GraphNode node;
      node.op = impl->node ? std::string(impl->node->op) : "leaf";
      node.shape = impl->shape;
      for (std::size_t k = 0; k < n_inputs; ++k) {
        node.inputs.push_back(index.at(impl->node->inputs[k].get()));
      }
      index[impl] = graph.nodes.size();
      graph.nodes.push_back(std::move(node));
    }
    stack.pop_back();
  }
  return graph;
}

}  // namespace mccnn
