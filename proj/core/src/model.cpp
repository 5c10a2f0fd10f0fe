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

#include "mccnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "mccnn/error.hpp"
#include "mccnn/heatmap.hpp"
#include "mccnn/ops.hpp"
#include "text_util.hpp"

namespace mccnn {

namespace {

Tensor he_normal(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = dist(rng);
  return Tensor(std::move(shape), std::move(values), true);
}

ConvParams make_conv(std::size_t cout, std::size_t cin, std::size_t k, std::mt19937_64& rng) {
  return ConvParams{he_normal(Shape{cout, cin, k, k}, cin * k * k, rng), Tensor(Shape{cout}, true)};
}

LinearParams make_linear(std::size_t out, std::size_t in, std::mt19937_64& rng) {
  return LinearParams{he_normal(Shape{out, in}, in, rng), Tensor(Shape{out}, true)};
}

Tensor clone_tensor(const Tensor& t) {
  if (!t.defined()) return t;
  return Tensor(t.shape(), std::vector<double>(t.data().begin(), t.data().end()), true);
}

std::string_view head_name(FeatureHead head) { return head == FeatureHead::kGap ? "gap" : "flatten"; }
std::string_view branching_name(Branching b) { return b == Branching::kPairwise ? "pairwise" : "single"; }

}  // namespace

std::string_view distance_mode_name(DistanceMode mode) {
  switch (mode) {
    case DistanceMode::kAbsDiff:
      return "absdiff";
    case DistanceMode::kEuclidean:
      return "l2";
    case DistanceMode::kCosine:
      return "cosine";
  }
  return "absdiff";
}

DistanceMode parse_distance_mode(std::string_view name) {
  if (name == "absdiff") return DistanceMode::kAbsDiff;
  if (name == "l2") return DistanceMode::kEuclidean;
  if (name == "cosine") return DistanceMode::kCosine;
  throw ConfigError("unknown distance mode '" + std::string(name) + "'", "distance");
}

std::vector<int> parse_layer_set(std::string_view text) {
  std::vector<int> layers;
  for (char c : text) {
    if (c == ',' || c == ' ' || c == '{' || c == '}') continue;
    if (c < '0' || c > '9') throw ConfigError("bad layer set '" + std::string(text) + "'", "layers");
    layers.push_back(c - '0');
  }
  std::sort(layers.begin(), layers.end());
  return layers;
}

std::string layer_set_name(std::span<const int> layers) {
  std::string s;
  for (int l : layers) s += static_cast<char>('0' + l);
  return s;
}

void validate_hierarchical_layer_set(std::span<const int> layers) {
  if (layers.empty()) throw ConfigError("empty layer set", "layers");
  std::vector<int> sorted(layers.begin(), layers.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("duplicate layer in set " + layer_set_name(sorted), "layers");
  }
  if (sorted.front() < 0 || sorted.back() >= static_cast<int>(kExtractorLayers)) {
    throw ConfigError("layer ids must lie in 0..4", "layers");
  }
  if (sorted.front() != 0) {
    throw ConfigError("layer set " + layer_set_name(sorted) + " must include layer 0", "layers");
  }
}

void ExtractorConfig::validate() const {
  if (in_channels == 0) throw ConfigError("extractor needs at least one input channel", "in_channels");
  for (auto c : channels) {
    if (c == 0) throw ConfigError("layer channel counts must be positive", "channels");
  }
  if (stem_kernel % 2 == 0) throw ConfigError("stem kernel must be odd", "stem_kernel");
  if (stem_pool == 0) throw ConfigError("stem pool must be >= 1", "stem_pool");
  if (active_layers.empty()) throw ConfigError("no active layers", "layers");
  for (std::size_t i = 0; i < active_layers.size(); ++i) {
    const int l = active_layers[i];
    if (l < 0 || l >= static_cast<int>(kExtractorLayers)) throw ConfigError("layer ids must lie in 0..4", "layers");
    if (i > 0 && active_layers[i - 1] >= l) {
      throw ConfigError("active layers must be strictly increasing", "layers");
    }
  }
}

void ModelConfig::validate() const {
  extractor.validate();
  if (grid_height == 0 || grid_width == 0 || grid_height % extractor.stem_pool != 0 ||
      grid_width % extractor.stem_pool != 0) {
    throw ConfigError("grid must be non-empty and divisible by the stem pool", "grid");
  }
  if (hidden == 0) throw ConfigError("MLP hidden width must be positive", "hidden");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out << "active_layers=" << layer_set_name(extractor.active_layers) << '\n';
  out << "branching=" << branching_name(branching) << '\n';
  out << "channels=";
  for (std::size_t i = 0; i < kExtractorLayers; ++i) out << (i ? "," : "") << extractor.channels[i];
  out << '\n';
  out << "distance=" << distance_mode_name(distance) << '\n';
  out << "grid=" << grid_height << 'x' << grid_width << '\n';
  out << "head=" << head_name(extractor.head) << '\n';
  out << "hidden=" << hidden << '\n';
  out << "in_channels=" << extractor.in_channels << '\n';
  out << "init_seed=" << init_seed << '\n';
  out << "stem_kernel=" << extractor.stem_kernel << '\n';
  out << "stem_pool=" << extractor.stem_pool << '\n';
  return out.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  for (auto raw : detail::split(text, '\n')) {
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("model config line without '='", std::string(line));
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    try {
      if (key == "active_layers") {
        c.extractor.active_layers = parse_layer_set(value);
      } else if (key == "branching") {
        if (value == "pairwise") {
          c.branching = Branching::kPairwise;
        } else if (value == "single") {
          c.branching = Branching::kSingle;
        } else {
          throw ConfigError("bad branching", "branching");
        }
      } else if (key == "channels") {
        const auto parts = detail::split(value, ',');
        if (parts.size() != kExtractorLayers) throw ConfigError("channels needs 5 entries", "channels");
        for (std::size_t i = 0; i < kExtractorLayers; ++i) {
          c.extractor.channels[i] = detail::parse_number<std::size_t>(parts[i], "channels");
        }
      } else if (key == "distance") {
        c.distance = parse_distance_mode(value);
      } else if (key == "grid") {
        const auto x = value.find('x');
        if (x == std::string_view::npos) throw ConfigError("grid must look like HxW", "grid");
        c.grid_height = detail::parse_number<std::size_t>(value.substr(0, x), "grid");
        c.grid_width = detail::parse_number<std::size_t>(value.substr(x + 1), "grid");
      } else if (key == "head") {
        if (value == "gap") {
          c.extractor.head = FeatureHead::kGap;
        } else if (value == "flatten") {
          c.extractor.head = FeatureHead::kFlatten;
        } else {
          throw ConfigError("bad head", "head");
        }
      } else if (key == "hidden") {
        c.hidden = detail::parse_number<std::size_t>(value, "hidden");
      } else if (key == "in_channels") {
        c.extractor.in_channels = detail::parse_number<std::size_t>(value, "in_channels");
      } else if (key == "init_seed") {
        c.init_seed = detail::parse_number<std::uint64_t>(value, "init_seed");
      } else if (key == "stem_kernel") {
        c.extractor.stem_kernel = detail::parse_number<std::size_t>(value, "stem_kernel");
      } else if (key == "stem_pool") {
        c.extractor.stem_pool = detail::parse_number<std::size_t>(value, "stem_pool");
      } else {
        throw ConfigError("unknown model config key '" + std::string(key) + "'", std::string(key));
      }
    } catch (const ValidationError& e) {
      throw ConfigError(e.what(), std::string(key));
    }
  }
  c.validate();
  return c;
}

std::vector<Shape> feature_shapes(const ModelConfig& config) {
  config.validate();
  const auto& ex = config.extractor;
  std::vector<Shape> shapes;
  std::size_t h = config.grid_height / ex.stem_pool;
  std::size_t w = config.grid_width / ex.stem_pool;
  shapes.push_back(Shape{ex.channels[0], h, w});
  for (std::size_t j = 1; j < ex.depth(); ++j) {
    // 3x3, pad 1, stride 2
    h = (h - 1) / 2 + 1;
    w = (w - 1) / 2 + 1;
    shapes.push_back(Shape{ex.channels[j], h, w});
  }
  return shapes;
}

std::size_t distance_length(const ModelConfig& config) {
  const auto& active = config.extractor.active_layers;
  if (config.branching == Branching::kPairwise && config.distance != DistanceMode::kAbsDiff) {
    return active.size();
  }
  std::size_t n = 0;
  for (int l : active) n += config.extractor.channels[static_cast<std::size_t>(l)];
  return n;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const auto& ex = config_.extractor;
  std::mt19937_64 rng(config_.init_seed);
  stem_ = make_conv(ex.channels[0], ex.in_channels, ex.stem_kernel, rng);
  for (std::size_t j = 1; j < ex.depth(); ++j) {
    ResidualBlockParams block;
    block.conv1 = make_conv(ex.channels[j], ex.channels[j - 1], 3, rng);
    block.conv2 = make_conv(ex.channels[j], ex.channels[j], 3, rng);
    block.projection = make_conv(ex.channels[j], ex.channels[j - 1], 1, rng);
    blocks_.push_back(std::move(block));
  }
  if (ex.head == FeatureHead::kFlatten) {
    const auto shapes = feature_shapes(config_);
    for (int l : ex.active_layers) {
      const auto& s = shapes[static_cast<std::size_t>(l)];
      feature_fc_.push_back(make_linear(s[0], shape_numel(s), rng));
    }
  }
  mlp_hidden_ = make_linear(config_.hidden, distance_length(config_), rng);
  mlp_output_ = make_linear(2, config_.hidden, rng);
}

std::vector<std::pair<std::string, Tensor>> Model::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("layer0.conv.kernel", stem_.kernel);
  out.emplace_back("layer0.conv.bias", stem_.bias);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "layer" + std::to_string(i + 1) + ".";
    out.emplace_back(p + "conv1.kernel", blocks_[i].conv1.kernel);
    out.emplace_back(p + "conv1.bias", blocks_[i].conv1.bias);
    out.emplace_back(p + "conv2.kernel", blocks_[i].conv2.kernel);
    out.emplace_back(p + "conv2.bias", blocks_[i].conv2.bias);
    out.emplace_back(p + "proj.kernel", blocks_[i].projection.kernel);
    out.emplace_back(p + "proj.bias", blocks_[i].projection.bias);
  }
  for (std::size_t i = 0; i < feature_fc_.size(); ++i) {
    const std::string p = "head" + std::to_string(config_.extractor.active_layers[i]) + ".fc.";
    out.emplace_back(p + "weight", feature_fc_[i].weight);
    out.emplace_back(p + "bias", feature_fc_[i].bias);
  }
  out.emplace_back("mlp.hidden.weight", mlp_hidden_.weight);
  out.emplace_back("mlp.hidden.bias", mlp_hidden_.bias);
  out.emplace_back("mlp.output.weight", mlp_output_.weight);
  out.emplace_back("mlp.output.bias", mlp_output_.bias);
  return out;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (auto& [_, t] : named_parameters()) out.push_back(t);
  return out;
}

Model Model::clone() const {
  Model copy = *this;
  copy.stem_ = {clone_tensor(stem_.kernel), clone_tensor(stem_.bias)};
  for (auto& b : copy.blocks_) {
    for (auto* c : {&b.conv1, &b.conv2, &b.projection}) *c = {clone_tensor(c->kernel), clone_tensor(c->bias)};
  }
  for (auto& l : copy.feature_fc_) l = {clone_tensor(l.weight), clone_tensor(l.bias)};
  copy.mlp_hidden_ = {clone_tensor(mlp_hidden_.weight), clone_tensor(mlp_hidden_.bias)};
  copy.mlp_output_ = {clone_tensor(mlp_output_.weight), clone_tensor(mlp_output_.bias)};
  return copy;
}

std::vector<LayerFeatures> extract_features(const Tensor& input, const Model& model) {
  const auto& config = model.config();
  const auto& ex = config.extractor;
  const Shape expected{ex.in_channels, config.grid_height, config.grid_width};
  if (input.shape() != expected) {
    throw DimensionError("extractor expects input " + shape_to_string(expected) + ", got " +
                         shape_to_string(input.shape()));
  }
  std::vector<Tensor> maps;
  maps.reserve(ex.depth());
  const auto& stem = model.stem();
  maps.push_back(avg_pool2d(relu(conv2d(input, stem.kernel, stem.bias, 1, ex.stem_kernel / 2)), ex.stem_pool));
  for (std::size_t j = 1; j < ex.depth(); ++j) {
    const auto& b = model.blocks()[j - 1];
    const Tensor& prev = maps.back();
    Tensor h = relu(conv2d(prev, b.conv1.kernel, b.conv1.bias, 2, 1));
    h = conv2d(h, b.conv2.kernel, b.conv2.bias, 1, 1);
    Tensor shortcut = conv2d(prev, b.projection.kernel, b.projection.bias, 2, 0);
    maps.push_back(relu(add(h, shortcut)));
  }

  std::vector<LayerFeatures> out;
  out.reserve(ex.active_layers.size());
  for (std::size_t i = 0; i < ex.active_layers.size(); ++i) {
    const int l = ex.active_layers[i];
    const Tensor& f = maps[static_cast<std::size_t>(l)];
    Tensor v;
    if (ex.head == FeatureHead::kGap) {
      v = global_avg_pool(f);
    } else {
      const auto& fc = model.feature_fc()[i];
      v = linear(flatten(f), fc.weight, fc.bias);
    }
    out.push_back(LayerFeatures{l, f, std::move(v)});
  }
  return out;
}

DistanceVector distance_vector(std::span<const Tensor> first, std::span<const Tensor> second,
                               DistanceMode mode) {
  if (first.size() != second.size() || first.empty()) {
    throw DimensionError("distance_vector: branches have " + std::to_string(first.size()) + " and " +
                         std::to_string(second.size()) + " layers");
  }
  std::vector<Tensor> parts;
  DistanceVector d;
  std::size_t offset = 0;
  for (std::size_t j = 0; j < first.size(); ++j) {
    if (first[j].shape() != second[j].shape()) {
      throw DimensionError("distance_vector: layer " + std::to_string(j) + " shapes " +
                           shape_to_string(first[j].shape()) + " and " + shape_to_string(second[j].shape()) +
                           " differ");
    }
    d.offsets.push_back(offset);
    switch (mode) {
      case DistanceMode::kAbsDiff:
        parts.push_back(abs(sub(first[j], second[j])));
        break;
      case DistanceMode::kEuclidean:
        parts.push_back(euclidean_distance(first[j], second[j]));
        break;
      case DistanceMode::kCosine:
        parts.push_back(cosine_distance(first[j], second[j]));
        break;
    }
    offset += parts.back().numel();
  }
  d.values = concat(parts);
  return d;
}

Prediction predict(const Tensor& d, const Model& model) {
  const auto& w1 = model.mlp_hidden();
  if (d.rank() != 1 || d.numel() != w1.weight.dim(1)) {
    throw DimensionError("predictor expects a distance vector of length " + std::to_string(w1.weight.dim(1)) +
                         ", got shape " + shape_to_string(d.shape()));
  }
  const auto& w2 = model.mlp_output();
  Tensor hidden = relu(linear(d, w1.weight, w1.bias));
  Tensor logits = linear(hidden, w2.weight, w2.bias);
  Tensor probs = softmax2(logits);
  return Prediction{std::move(logits), std::move(probs)};
}

namespace {

std::vector<Tensor> vectors_of(std::span<const LayerFeatures> features) {
  std::vector<Tensor> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.vector);
  return out;
}

}  // namespace

Prediction predict_pair(std::span<const LayerFeatures> unknown, std::span<const LayerFeatures> reference,
                        const Model& model) {
  const auto a = vectors_of(unknown);
  const auto b = vectors_of(reference);
  return predict(distance_vector(a, b, model.config().distance).values, model);
}

Prediction predict_single(std::span<const LayerFeatures> features, const Model& model) {
  const auto v = vectors_of(features);
  return predict(concat(v), model);
}

double forward_pair(const Combination& combo, const Model& model) {
  if (model.config().branching != Branching::kPairwise) {
    throw UsageError("forward_pair needs a pairwise model");
  }
  NoGradGuard no_grad;
  const auto unknown = extract_features(stack_to_tensor(*combo.unknown), model);
  const auto reference = extract_features(stack_to_tensor(*combo.reference), model);
  const auto p = predict_pair(unknown, reference, model);
  return std::clamp(p.probabilities.at(1), kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
}

std::size_t ParamCounts::of(std::string_view name) const {
  for (const auto& [n, c] : entries) {
    if (n == name) return c;
  }
  return 0;
}

ParamCounts param_count(const Model& model, bool breakdown) {
  ParamCounts counts;
  std::map<std::string, std::size_t> components{{"extractor", 0}, {"feature_fc", 0}, {"gap", 0}, {"mlp", 0}};
  for (const auto& [name, t] : model.named_parameters()) {
    const std::size_t n = t.numel();
    counts.total += n;
    if (breakdown) counts.entries.emplace_back(name, n);
    if (name.starts_with("layer")) {
      components["extractor"] += n;
    } else if (name.starts_with("head")) {
      components["feature_fc"] += n;
    } else {
      components["mlp"] += n;
    }
  }
  if (breakdown) {
    counts.entries.emplace_back("gap", 0);
  } else {
    for (const char* key : {"extractor", "gap", "feature_fc", "mlp"}) counts.entries.emplace_back(key, components[key]);
  }
  return counts;
}

}  // namespace mccnn
