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

#ifndef MCCNN_OPS_HPP_
#define MCCNN_OPS_HPP_

#include <cstddef>
#include <span>

#include "mccnn/tensor.hpp"

namespace mccnn {

/// Probability clamp used by bce_loss.
inline constexpr double kProbabilityEpsilon = 1e-7;

/// Cross-correlation of a [Cin,H,W] map with a [Cout,Cin,k,k] kernel.
/// Output is [Cout, (H+2*pad-k)/stride+1, (W+2*pad-k)/stride+1]; k must be odd.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              std::size_t stride = 1, std::size_t pad = 0);

/// Elementwise max(0, x). The gradient at exactly 0 is 0.
Tensor relu(const Tensor& x);

/// Non-overlapping mean pooling of a [C,H,W] map; H and W must divide by window.
Tensor avg_pool2d(const Tensor& x, std::size_t window);

/// [C,H,W] -> [C], mean over each channel's spatial extent.
Tensor global_avg_pool(const Tensor& feature_map);

/// W x + b for x:[n], W:[m,n], b:[m].
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Two-way softmax with max subtraction.
Tensor softmax2(const Tensor& logits);

/// -[l log p + (1-l) log(1-p)] with p clamped to [eps, 1-eps].
/// The clamp has zero gradient where it is active.
Tensor bce_loss(const Tensor& probability, int label, double eps = kProbabilityEpsilon);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor abs(const Tensor& x);  // d|x|/dx at 0 is 0
Tensor square(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);
Tensor flatten(const Tensor& x);
Tensor slice(const Tensor& x, std::size_t offset, std::size_t count);
/// Concatenates the flattened inputs.
Tensor concat(std::span<const Tensor> parts);

/// sqrt(sum((a-b)^2) + eps); eps keeps the gradient finite at a == b.
Tensor euclidean_distance(const Tensor& a, const Tensor& b, double eps = 1e-12);
/// 1 - a.b / (|a| |b|), with eps added under each norm.
Tensor cosine_distance(const Tensor& a, const Tensor& b, double eps = 1e-12);

/// w <- w - lr * grad for each parameter, then zeroes the gradients.
/// Parameters with no gradient are left untouched.
void sgd_step(std::span<Tensor> params, double lr);

}  // namespace mccnn

#endif  // MCCNN_OPS_HPP_
