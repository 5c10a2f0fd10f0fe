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

// Reference implementations used only by tests. They are written for
// clarity over speed and share no code with the library.

#ifndef MCCNN_TESTS_ORACLES_HPP_
#define MCCNN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Direct nested-loop cross-correlation. input [cin,h,w], kernel
/// [cout,cin,k,k], output [cout,oh,ow].
inline std::vector<double> conv2d(const std::vector<double>& input, std::size_t cin, std::size_t h, std::size_t w,
                                  const std::vector<double>& kernel, std::size_t cout, std::size_t k,
                                  const std::vector<double>& bias, std::size_t stride, std::size_t pad,
                                  std::size_t* out_h = nullptr, std::size_t* out_w = nullptr) {
  const std::size_t oh = (h + 2 * pad - k) / stride + 1;
  const std::size_t ow = (w + 2 * pad - k) / stride + 1;
  if (out_h) *out_h = oh;
  if (out_w) *out_w = ow;
  std::vector<double> out(cout * oh * ow, 0.0);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = bias.empty() ? 0.0 : bias[o];
        for (std::size_t c = 0; c < cin; ++c) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(pad);
              const long ix = static_cast<long>(x * stride + kx) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
              acc += input[(c * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)] *
                     kernel[((o * cin + c) * k + ky) * k + kx];
            }
          }
        }
        out[(o * oh + y) * ow + x] = acc;
      }
    }
  }
  return out;
}

/// Mean of every non-overlapping window x window block.
inline std::vector<double> window_mean(const std::vector<double>& x, std::size_t c, std::size_t h, std::size_t w,
                                       std::size_t window) {
  const std::size_t oh = h / window, ow = w / window;
  std::vector<double> out(c * oh * ow, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        double s = 0.0;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) s += x[(ch * h + y * window + dy) * w + xx * window + dx];
        }
        out[(ch * oh + y) * ow + xx] = s / static_cast<double>(window * window);
      }
    }
  }
  return out;
}

inline std::vector<double> channel_mean(const std::vector<double>& x, std::size_t c, std::size_t area) {
  std::vector<double> out(c, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t i = 0; i < area; ++i) s += x[ch * area + i];
    out[ch] = s / static_cast<double>(area);
  }
  return out;
}

struct Point {
  double x, y, weight;
};

/// Heatmap by direct 2-D summation: every pixel adds the contribution of
/// every fixation through the truncated, normalized Gaussian. No impulse grid
/// and no separable passes. Result divided by its maximum.
inline std::vector<double> dense_heatmap(const std::vector<Point>& points, std::size_t h, std::size_t w,
                                         double sigma) {
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  double norm = 0.0;
  for (long i = -radius; i <= radius; ++i) norm += std::exp(-(double)(i * i) / (2.0 * sigma * sigma));
  auto g = [&](long d) {
    if (d < -radius || d > radius) return 0.0;
    return std::exp(-(double)(d * d) / (2.0 * sigma * sigma)) / norm;
  };
  std::vector<double> out(h * w, 0.0);
  for (const auto& p : points) {
    const long px = std::lround(std::clamp(p.x, 0.0, 1.0) * (double)(w - 1));
    const long py = std::lround(std::clamp(p.y, 0.0, 1.0) * (double)(h - 1));
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out[y * w + x] += p.weight * g((long)x - px) * g((long)y - py);
      }
    }
  }
  const double peak = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  if (peak > 0.0) {
    for (auto& v : out) v /= peak;
  }
  return out;
}

/// Central difference of `f` with respect to every entry of `x` (restored
/// afterwards).
inline std::vector<double> finite_difference(const std::function<double()>& f, double* x, std::size_t n,
                                             double h = 1e-5) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f();
    x[i] = saved - h;
    const double down = f();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// |a-b| / max(|a|, |b|, floor). The floor keeps entries whose true gradient
/// is ~0 from turning rounding noise into huge relative errors.
inline double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct Counts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Counts by enumerating the four (prediction, label) cases with AD = 0
/// as the positive class.
inline Counts enumerate(const std::vector<int>& pred, const std::vector<int>& label) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 0 && label[i] == 0) c.tp++;
    if (pred[i] == 0 && label[i] == 1) c.fp++;
    if (pred[i] == 1 && label[i] == 1) c.tn++;
    if (pred[i] == 1 && label[i] == 0) c.fn++;
  }
  return c;
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace oracle

#endif  // MCCNN_TESTS_ORACLES_HPP_
