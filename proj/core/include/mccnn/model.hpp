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

// Multi-layer comparison CNN.
//
// One shared extractor is applied to both heatmap stacks of a pair. Layer 0
// is a 3x3 conv followed by ReLU and 2x2 average pooling. Layers 1-4 are
// residual blocks: two 3x3 convs, the first with stride 2, plus a 1x1
// stride-2 projection shortcut.
//
// Global average pooling turns each active layer's feature map into a
// vector, and the two branches' vectors are compared layer by layer. The
// concatenated distance vector feeds a two-layer MLP; the second component
// of its two-way softmax is the pair similarity.

#ifndef MCCNN_MODEL_HPP_
#define MCCNN_MODEL_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mccnn/dataset.hpp"
#include "mccnn/tensor.hpp"

namespace mccnn {

inline constexpr std::size_t kExtractorLayers = 5;

enum class DistanceMode {
  kAbsDiff,    // |v0 - v1| per component, concatenated
  kEuclidean,  // one L2 distance per layer
  kCosine,     // one cosine distance per layer
};

/// How a feature map becomes a feature vector.
enum class FeatureHead {
  kGap,      // global average pooling, no parameters
  kFlatten,  // flatten + fully connected layer with as many outputs as channels
};

enum class Branching {
  kPairwise,  // two stacks, shared extractor, distance vector
  kSingle,    // one stack, concatenated feature vectors, group label
};

std::string_view distance_mode_name(DistanceMode mode);
DistanceMode parse_distance_mode(std::string_view name);

struct ExtractorConfig {
  std::size_t in_channels = 9;
  std::array<std::size_t, kExtractorLayers> channels{8, 16, 32, 64, 128};
  std::size_t stem_kernel = 3;
  std::size_t stem_pool = 2;
  /// Layers whose feature vectors are compared. Layers 0..max(active) are
  /// always computed in sequence.
  std::vector<int> active_layers{0, 1, 2, 3, 4};
  FeatureHead head = FeatureHead::kGap;

  std::size_t depth() const { return static_cast<std::size_t>(active_layers.back()) + 1; }
  void validate() const;
};

/// Parses "01234", "0,1,2" or "0 1 2" into a sorted layer list.
std::vector<int> parse_layer_set(std::string_view text);
std::string layer_set_name(std::span<const int> layers);  // "01234"
/// A layer-combination study subset: valid ids, no duplicates, contains 0.
void validate_hierarchical_layer_set(std::span<const int> layers);

struct ModelConfig {
  ExtractorConfig extractor;
  std::size_t grid_height = 32;
  std::size_t grid_width = 32;
  std::size_t hidden = 64;
  DistanceMode distance = DistanceMode::kAbsDiff;
  Branching branching = Branching::kPairwise;
  std::uint64_t init_seed = 42;

  void validate() const;
  /// key=value lines, fixed key order.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);
};

/// Feature-map shape of every computed layer, derived from conv arithmetic
/// without running the network.
std::vector<Shape> feature_shapes(const ModelConfig& config);
/// Length of the predictor input.
std::size_t distance_length(const ModelConfig& config);

struct ConvParams {
  Tensor kernel;
  Tensor bias;
};

struct LinearParams {
  Tensor weight;
  Tensor bias;
};

struct ResidualBlockParams {
  ConvParams conv1;
  ConvParams conv2;
  ConvParams projection;
};

/// Parameters plus architecture. Copies share parameter storage; use clone()
/// for an independent copy.
class Model {
 public:
  /// Zero biases, He-normal weights (std sqrt(2/fan_in)) from config.init_seed.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }

  const ConvParams& stem() const { return stem_; }
  const std::vector<ResidualBlockParams>& blocks() const { return blocks_; }
  /// One per active layer, flatten head only.
  const std::vector<LinearParams>& feature_fc() const { return feature_fc_; }
  const LinearParams& mlp_hidden() const { return mlp_hidden_; }
  const LinearParams& mlp_output() const { return mlp_output_; }

  /// All trainable tensors in declaration order.
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;

  Model clone() const;

 private:
  ModelConfig config_;
  ConvParams stem_;
  std::vector<ResidualBlockParams> blocks_;
  std::vector<LinearParams> feature_fc_;
  LinearParams mlp_hidden_;
  LinearParams mlp_output_;
};

struct LayerFeatures {
  int layer = 0;
  Tensor feature_map;  // F^j
  Tensor vector;       // v^j
};

/// Runs the extractor on a [in_channels, H, W] input; returns active layers
/// in ascending order. Throws DimensionError on a grid mismatch.
std::vector<LayerFeatures> extract_features(const Tensor& input, const Model& model);

struct DistanceVector {
  Tensor values;
  std::vector<std::size_t> offsets;  // start of each layer's block
};

/// Compares per-layer feature vectors of the two branches.
DistanceVector distance_vector(std::span<const Tensor> first, std::span<const Tensor> second,
                               DistanceMode mode);

struct Prediction {
  Tensor logits;         // s
  Tensor probabilities;  // softmax(s); [1] is the similarity
};

/// s = W2 relu(W1 d + b1) + b2 and its softmax.
Prediction predict(const Tensor& d, const Model& model);

/// Similarity of a pair (probability the unknown subject is normal), clamped
/// to [eps, 1-eps]. No graph is recorded.
double forward_pair(const Combination& combo, const Model& model);

/// Graph-recording pair forward from precomputed branch features.
Prediction predict_pair(std::span<const LayerFeatures> unknown, std::span<const LayerFeatures> reference,
                        const Model& model);
/// Graph-recording single-branch forward (Branching::kSingle).
Prediction predict_single(std::span<const LayerFeatures> features, const Model& model);

struct ParamCounts {
  std::vector<std::pair<std::string, std::size_t>> entries;
  std::size_t total = 0;

  /// Count of the named entry; 0 when absent.
  std::size_t of(std::string_view name) const;
};

/// Trainable parameter counts. Without breakdown: components "extractor",
/// "gap" (always 0), "feature_fc" and "mlp". With breakdown: one entry per
/// tensor plus "gap".
ParamCounts param_count(const Model& model, bool breakdown = false);

}  // namespace mccnn

#endif  // MCCNN_MODEL_HPP_
