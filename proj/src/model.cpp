// Copyright 2026 The HCFSLN Authors.
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

#include "hcfsln/model.hpp"

#include <random>
#include <stdexcept>

namespace hcfsln {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kHyperbolic ? "hyperbolic" : "euclidean";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "hyperbolic") return ModelKind::kHyperbolic;
  if (text == "euclidean") return ModelKind::kEuclidean;
  throw std::invalid_argument("model kind must be hyperbolic|euclidean, got '" +
                              text + "'");
}

std::string to_string(Pooling pooling) {
  return pooling == Pooling::kMean ? "mean" : "last";
}

Pooling parse_pooling(const std::string& text) {
  if (text == "mean") return Pooling::kMean;
  if (text == "last") return Pooling::kLast;
  throw std::invalid_argument("pool must be mean|last, got '" + text + "'");
}

ModelParams ModelParams::init(const DatasetMeta& layout,
                              const ModelOptions& options, std::uint64_t seed) {
  if (layout.modalities.empty()) throw std::invalid_argument("model needs >= 1 modality");
  if (layout.seq_len < kConv2Width) {
    throw std::invalid_argument("sequence length " + std::to_string(layout.seq_len) +
                                " is shorter than the width-5 convolution");
  }
  if (options.embed_dim == 0) throw std::invalid_argument("embed_dim must be > 0");
  if (options.dropout < 0.0 || options.dropout >= 1.0) {
    throw std::invalid_argument("dropout must be in [0, 1)");
  }
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.layout = layout;
  p.options = options;
  for (const auto& m : p.modality_configs()) {
    p.encoders.push_back(EncoderParams::init(m, options.embed_dim, options.heads,
                                             options.dropout, rng));
  }
  p.cross = CrossModalParams::init(options.embed_dim, options.heads, rng);
  p.gating = GatingParams::init(options.embed_dim, rng);
  p.curvature = geometry::Curvature(options.alpha_init, options.alpha_trainable);
  p.residual = geometry::ResidualBlock::zeros(options.embed_dim);
  return p;
}

std::vector<ModalityConfig> ModelParams::modality_configs() const {
  std::vector<ModalityConfig> out;
  for (const auto& m : layout.modalities) out.push_back({m.name, m.dim, layout.seq_len});
  return out;
}

std::vector<NamedTensor> ModelParams::parameters() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < encoders.size(); ++i)
    encoders[i].collect(out, "encoder." + layout.modalities[i].name);
  cross.collect(out, "cross");
  gating.collect(out, "gating");
  if (options.kind == ModelKind::kHyperbolic) {
    out.push_back({"curvature.log_alpha", curvature.log_alpha()});
    out.push_back({"residual.weight", residual.weight});
    out.push_back({"residual.bias", residual.bias});
  }
  return out;
}

std::vector<Tensor> ModelParams::trainable() const {
  std::vector<Tensor> out;
  for (auto& p : parameters())
    if (p.tensor.requires_grad()) out.push_back(p.tensor);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams copy = init(layout, options, 0);
  const auto src = parameters();
  auto dst = copy.parameters();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto values = dst[i].tensor.mutable_values();
    std::copy(src[i].tensor.values().begin(), src[i].tensor.values().end(),
              values.begin());
    dst[i].tensor.set_requires_grad(src[i].tensor.requires_grad());
  }
  return copy;
}

}  // namespace hcfsln
