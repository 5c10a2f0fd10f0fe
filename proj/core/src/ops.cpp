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

#include "mccnn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "mccnn/error.hpp"

namespace mccnn {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got shape " + shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()) + " differ");
  }
}

struct ConvGeometry {
  std::size_t cin, h, w, cout, k, stride, pad, ho, wo;
  std::size_t patch() const { return cin * k * k; }
  std::size_t positions() const { return ho * wo; }
};

// cols is [cin*k*k, ho*wo], row-major.
void im2col(const double* in, const ConvGeometry& g, double* cols) {
  const std::size_t p = g.positions();
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        double* row = cols + ((c * g.k + ky) * g.k + kx) * p;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          double* out = row + oy * g.wo;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
            std::fill(out, out + g.wo, 0.0);
            continue;
          }
          const double* src = in + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.pad);
            out[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w))
                          ? 0.0
                          : src[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

void col2im_accumulate(const double* cols, const ConvGeometry& g, double* grad_in) {
  const std::size_t p = g.positions();
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const double* row = cols + ((c * g.k + ky) * g.k + kx) * p;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          double* dst = grad_in + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.pad);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w)) {
              dst[static_cast<std::size_t>(ix)] += row[oy * g.wo + ox];
            }
          }
        }
      }
    }
  }
}

template <typename F>
std::vector<double> map_values(const Tensor& x, F&& f) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias, std::size_t stride,
              std::size_t pad) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(kernel, 4, "conv2d", "kernel");
  require_rank(bias, 1, "conv2d", "bias");
  ConvGeometry g{};
  g.cin = input.dim(0);
  g.h = input.dim(1);
  g.w = input.dim(2);
  g.cout = kernel.dim(0);
  g.k = kernel.dim(2);
  g.stride = stride;
  g.pad = pad;
  if (kernel.dim(1) != g.cin) {
    throw DimensionError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                         " input channels, input has " + std::to_string(g.cin));
  }
  if (kernel.dim(3) != g.k || g.k % 2 == 0) {
    throw DimensionError("conv2d: kernel must be square with odd size, got " +
                         shape_to_string(kernel.shape()));
  }
  if (bias.dim(0) != g.cout) {
    throw DimensionError("conv2d: bias has " + std::to_string(bias.dim(0)) + " entries, expected " +
                         std::to_string(g.cout));
  }
  if (stride < 1) throw DimensionError("conv2d: stride must be >= 1");
  if (g.h + 2 * pad < g.k || g.w + 2 * pad < g.k) {
    throw DimensionError("conv2d: kernel larger than padded input " +
                         shape_to_string(input.shape()));
  }
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;

  // Products run on Eigen-owned, fully aligned matrices. Eigen picks its
  // vectorization prologue from the runtime address, so mapping arbitrary
  // heap buffers would make rounding depend on where they happen to land.
  const auto cout = static_cast<Eigen::Index>(g.cout);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  const auto pos = static_cast<Eigen::Index>(g.positions());
  auto cols = std::make_shared<RowMatrix>(patch, pos);
  im2col(input.data().data(), g, cols->data());
  auto weights = std::make_shared<RowMatrix>(ConstMatrixMap(kernel.data().data(), cout, patch));

  RowMatrix product = (*weights) * (*cols);
  std::vector<double> out(product.data(), product.data() + product.size());
  const auto b = bias.data();
  for (std::size_t c = 0; c < g.cout; ++c) {
    double* row = out.data() + c * g.positions();
    for (std::size_t i = 0; i < g.positions(); ++i) row[i] += b[c];
  }

  return Tensor::from_op(
      Shape{g.cout, g.ho, g.wo}, std::move(out), "conv2d", {input, kernel, bias},
      [g, cols, weights](std::span<const double> gout, std::span<const std::span<double>> grads) {
        const auto cout = static_cast<Eigen::Index>(g.cout);
        const auto pos = static_cast<Eigen::Index>(g.positions());
        const RowMatrix go = ConstMatrixMap(gout.data(), cout, pos);
        if (!grads[1].empty()) {
          const RowMatrix gw = go * cols->transpose();
          for (std::size_t i = 0; i < grads[1].size(); ++i) grads[1][i] += gw.data()[i];
        }
        if (!grads[2].empty()) {
          for (std::size_t c = 0; c < g.cout; ++c) {
            double acc = 0.0;
            for (std::size_t i = 0; i < g.positions(); ++i) acc += gout[c * g.positions() + i];
            grads[2][c] += acc;
          }
        }
        if (!grads[0].empty()) {
          const RowMatrix gcols = weights->transpose() * go;
          col2im_accumulate(gcols.data(), g, grads[0].data());
        }
      });
}

Tensor relu(const Tensor& x) {
  return Tensor::from_op(x.shape(), map_values(x, [](double v) { return v > 0.0 ? v : 0.0; }),
                         "relu", {x},
                         [x](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           const auto in = x.data();
                           for (std::size_t i = 0; i < gout.size(); ++i) {
                             if (in[i] > 0.0) grads[0][i] += gout[i];
                           }
                         });
}

Tensor avg_pool2d(const Tensor& x, std::size_t window) {
  require_rank(x, 3, "avg_pool2d", "input");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (window == 0 || h % window != 0 || w % window != 0) {
    throw DimensionError("avg_pool2d: window " + std::to_string(window) + " does not divide " +
                         shape_to_string(x.shape()));
  }
  const std::size_t ho = h / window, wo = w / window;
  const double scale = 1.0 / static_cast<double>(window * window);
  const auto in = x.data();
  std::vector<double> out(c * ho * wo, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < window; ++dy) {
          const double* row = &in[(ch * h + oy * window + dy) * w + ox * window];
          for (std::size_t dx = 0; dx < window; ++dx) acc += row[dx];
        }
        out[(ch * ho + oy) * wo + ox] = acc * scale;
      }
    }
  }
  return Tensor::from_op(
      Shape{c, ho, wo}, std::move(out), "avg_pool2d", {x},
      [c, h, w, ho, wo, window, scale](std::span<const double> gout,
                                       std::span<const std::span<double>> grads) {
        auto gin = grads[0];
        for (std::size_t ch = 0; ch < c; ++ch) {
          for (std::size_t iy = 0; iy < h; ++iy) {
            const double* grow = &gout[(ch * ho + iy / window) * wo];
            double* dst = &gin[(ch * h + iy) * w];
            for (std::size_t ix = 0; ix < w; ++ix) dst[ix] += grow[ix / window] * scale;
          }
        }
      });
}

Tensor global_avg_pool(const Tensor& feature_map) {
  require_rank(feature_map, 3, "global_avg_pool", "feature map");
  const std::size_t c = feature_map.dim(0);
  const std::size_t area = feature_map.dim(1) * feature_map.dim(2);
  if (area == 0) throw DimensionError("global_avg_pool: empty spatial extent");
  const double scale = 1.0 / static_cast<double>(area);
  const auto in = feature_map.data();
  std::vector<double> out(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < area; ++i) acc += in[ch * area + i];
    out[ch] = acc * scale;
  }
  return Tensor::from_op(Shape{c}, std::move(out), "global_avg_pool", {feature_map},
                         [c, area, scale](std::span<const double> gout,
                                          std::span<const std::span<double>> grads) {
                           for (std::size_t ch = 0; ch < c; ++ch) {
                             const double g = gout[ch] * scale;
                             double* dst = &grads[0][ch * area];
                             for (std::size_t i = 0; i < area; ++i) dst[i] += g;
                           }
                         });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 1, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const std::size_t m = weight.dim(0), n = weight.dim(1);
  if (x.dim(0) != n || bias.dim(0) != m) {
    throw DimensionError("linear: weight " + shape_to_string(weight.shape()) + " does not conform to input " +
                         shape_to_string(x.shape()) + " and bias " + shape_to_string(bias.shape()));
  }
  const auto w = weight.data();
  const auto xv = x.data();
  const auto b = bias.data();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = &w[i * n];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv[j];
    out[i] = acc + b[i];
  }
  return Tensor::from_op(Shape{m}, std::move(out), "linear", {x, weight, bias},
                         [x, weight, m, n](std::span<const double> gout,
                                           std::span<const std::span<double>> grads) {
                           const auto w = weight.data();
                           const auto xv = x.data();
                           if (!grads[0].empty()) {
                             for (std::size_t i = 0; i < m; ++i) {
                               const double* row = &w[i * n];
                               for (std::size_t j = 0; j < n; ++j) grads[0][j] += row[j] * gout[i];
                             }
                           }
                           if (!grads[1].empty()) {
                             for (std::size_t i = 0; i < m; ++i) {
                               double* row = &grads[1][i * n];
                               for (std::size_t j = 0; j < n; ++j) row[j] += gout[i] * xv[j];
                             }
                           }
                           if (!grads[2].empty()) {
                             for (std::size_t i = 0; i < m; ++i) grads[2][i] += gout[i];
                           }
                         });
}

Tensor softmax2(const Tensor& logits) {
  if (logits.numel() != 2) {
    throw DimensionError("softmax2: expected 2 logits, got shape " + shape_to_string(logits.shape()));
  }
  const auto s = logits.data();
  const double top = std::max(s[0], s[1]);
  const double e0 = std::exp(s[0] - top);
  const double e1 = std::exp(s[1] - top);
  const double z = e0 + e1;
  std::vector<double> p{e0 / z, e1 / z};
  const double p0 = p[0], p1 = p[1];
  return Tensor::from_op(Shape{2}, std::move(p), "softmax2", {logits},
                         [p0, p1](std::span<const double> gout,
                                  std::span<const std::span<double>> grads) {
                           // J = diag(p) - p p^T
                           const double dot = gout[0] * p0 + gout[1] * p1;
                           grads[0][0] += p0 * (gout[0] - dot);
                           grads[0][1] += p1 * (gout[1] - dot);
                         });
}

Tensor bce_loss(const Tensor& probability, int label, double eps) {
  if (probability.numel() != 1) {
    throw DimensionError("bce_loss: expected a single probability, got shape " +
                         shape_to_string(probability.shape()));
  }
  if (label != 0 && label != 1) throw UsageError("bce_loss: label must be 0 or 1");
  const double raw = probability.item();
  const double p = std::clamp(raw, eps, 1.0 - eps);
  const bool clamped = p != raw;
  const double loss = label == 1 ? -std::log(p) : -std::log(1.0 - p);
  return Tensor::from_op(Shape{1}, std::vector<double>{loss}, "bce_loss", {probability},
                         [p, clamped, label](std::span<const double> gout,
                                             std::span<const std::span<double>> grads) {
                           if (clamped) return;
                           grads[0][0] += gout[0] * (label == 1 ? -1.0 / p : 1.0 / (1.0 - p));
                         });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return Tensor::from_op(a.shape(), std::move(out), "add", {a, b},
                         [](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (auto g : grads) {
                             if (g.empty()) continue;
                             for (std::size_t i = 0; i < gout.size(); ++i) g[i] += gout[i];
                           }
                         });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return Tensor::from_op(a.shape(), std::move(out), "sub", {a, b},
                         [](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           if (!grads[0].empty()) {
                             for (std::size_t i = 0; i < gout.size(); ++i) grads[0][i] += gout[i];
                           }
                           if (!grads[1].empty()) {
                             for (std::size_t i = 0; i < gout.size(); ++i) grads[1][i] -= gout[i];
                           }
                         });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return Tensor::from_op(a.shape(), std::move(out), "mul", {a, b},
                         [a, b](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           const auto x = a.data(), y = b.data();
                           if (!grads[0].empty()) {
                             for (std::size_t i = 0; i < gout.size(); ++i) grads[0][i] += gout[i] * y[i];
                           }
                           if (!grads[1].empty()) {
                             for (std::size_t i = 0; i < gout.size(); ++i) grads[1][i] += gout[i] * x[i];
                           }
                         });
}

Tensor abs(const Tensor& x) {
  return Tensor::from_op(x.shape(), map_values(x, [](double v) { return std::fabs(v); }), "abs", {x},
                         [x](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           const auto in = x.data();
                           for (std::size_t i = 0; i < gout.size(); ++i) {
                             if (in[i] > 0.0) {
                               grads[0][i] += gout[i];
                             } else if (in[i] < 0.0) {
                               grads[0][i] -= gout[i];
                             }
                           }
                         });
}

Tensor square(const Tensor& x) {
  return Tensor::from_op(x.shape(), map_values(x, [](double v) { return v * v; }), "square", {x},
                         [x](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           const auto in = x.data();
                           for (std::size_t i = 0; i < gout.size(); ++i) grads[0][i] += 2.0 * in[i] * gout[i];
                         });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return Tensor::from_op(Shape{1}, std::vector<double>{acc}, "sum", {x},
                         [](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (auto& g : grads[0]) g += gout[0];
                         });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw DimensionError("mean of an empty tensor");
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const double scale = 1.0 / static_cast<double>(x.numel());
  return Tensor::from_op(Shape{1}, std::vector<double>{acc * scale}, "mean", {x},
                         [scale](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (auto& g : grads[0]) g += gout[0] * scale;
                         });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                         shape_to_string(shape));
  }
  return Tensor::from_op(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()),
                         "reshape", {x},
                         [](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (std::size_t i = 0; i < gout.size(); ++i) grads[0][i] += gout[i];
                         });
}

Tensor flatten(const Tensor& x) { return reshape(x, Shape{x.numel()}); }

Tensor slice(const Tensor& x, std::size_t offset, std::size_t count) {
  if (offset + count > x.numel()) {
    throw DimensionError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                         ") out of range for " + std::to_string(x.numel()) + " elements");
  }
  const auto in = x.data();
  return Tensor::from_op(Shape{count}, std::vector<double>(in.begin() + static_cast<std::ptrdiff_t>(offset),
                                                           in.begin() + static_cast<std::ptrdiff_t>(offset + count)),
                         "slice", {x},
                         [offset](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (std::size_t i = 0; i < gout.size(); ++i) grads[0][offset + i] += gout[i];
                         });
}

Tensor concat(std::span<const Tensor> parts) {
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    offsets.push_back(out.size());
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  const std::size_t total = out.size();
  return Tensor::from_op(Shape{total}, std::move(out), "concat",
                         std::vector<Tensor>(parts.begin(), parts.end()),
                         [offsets](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           for (std::size_t k = 0; k < grads.size(); ++k) {
                             auto g = grads[k];
                             for (std::size_t i = 0; i < g.size(); ++i) g[i] += gout[offsets[k] + i];
                           }
                         });
}

Tensor euclidean_distance(const Tensor& a, const Tensor& b, double eps) {
  require_same_shape(a, b, "euclidean_distance");
  const auto x = a.data(), y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - y[i]) * (x[i] - y[i]);
  const double r = std::sqrt(acc + eps);
  return Tensor::from_op(Shape{1}, std::vector<double>{r}, "euclidean_distance", {a, b},
                         [a, b, r](std::span<const double> gout, std::span<const std::span<double>> grads) {
                           const auto x = a.data(), y = b.data();
                           const double scale = gout[0] / r;
                           for (std::size_t i = 0; i < x.size(); ++i) {
                             const double g = scale * (x[i] - y[i]);
                             if (!grads[0].empty()) grads[0][i] += g;
                             if (!grads[1].empty()) grads[1][i] -= g;
                           }
                         });
}

Tensor cosine_distance(const Tensor& a, const Tensor& b, double eps) {
  require_same_shape(a, b, "cosine_distance");
  const auto x = a.data(), y = b.data();
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  const double na = std::sqrt(xx + eps);
  const double nb = std::sqrt(yy + eps);
  const double cosine = dot / (na * nb);
  return Tensor::from_op(
      Shape{1}, std::vector<double>{1.0 - cosine}, "cosine_distance", {a, b},
      [a, b, na, nb, cosine](std::span<const double> gout, std::span<const std::span<double>> grads) {
        const auto x = a.data(), y = b.data();
        // d cos / dx = y/(|x||y|) - cos * x/|x|^2, symmetric for y.
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (!grads[0].empty()) {
            grads[0][i] -= gout[0] * (y[i] / (na * nb) - cosine * x[i] / (na * na));
          }
          if (!grads[1].empty()) {
            grads[1][i] -= gout[0] * (x[i] / (na * nb) - cosine * y[i] / (nb * nb));
          }
        }
      });
}

void sgd_step(std::span<Tensor> params, double lr) {
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0", "lr");
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    auto w = p.mutable_data();
    const auto g = p.grad();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    p.zero_grad();
  }
}

}  // namespace mccnn
