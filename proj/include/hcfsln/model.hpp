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

#ifndef HCFSLN_MODEL_HPP_
#define HCFSLN_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hcfsln/data.hpp"
#include "hcfsln/encoder.hpp"
#include "hcfsln/geometry.hpp"

namespace hcfsln {

enum class ModelKind { kHyperbolic, kEuclidean };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);
std::string to_string(Pooling pooling);
Pooling parse_pooling(const std::string& text);

struct ModelOptions {
  std::size_t embed_dim = 64;
  std::size_t heads = 4;
  double dropout = 0.1;
  Pooling pooling = Pooling::kMean;
  ModelKind kind = ModelKind::kHyperbolic;
  double alpha_init = 1.0;
  bool alpha_trainable = true;
};

// All trainable state of one model. Tensors are shared handles: copying a
// ModelParams aliases the same storage; use clone() for an independent copy.
struct ModelParams {
  DatasetMeta layout;
  ModelOptions options;
  std::vector<EncoderParams> encoders;
  CrossModalParams cross;
  GatingParams gating;
  geometry::Curvature curvature;
  geometry::ResidualBlock residual;

  static ModelParams init(const DatasetMeta& layout, const ModelOptions& options,
                          std::uint64_t seed);

  std::vector<ModalityConfig> modality_configs() const;

  // Declared parameter order, used by the optimizer and the model blob.
  // Euclidean models carry no curvature or residual block.
  std::vector<NamedTensor> parameters() const;
  std::vector<Tensor> trainable() const;

  ModelParams clone() const;
};

}  // namespace hcfsln

#endif  // HCFSLN_MODEL_HPP_
