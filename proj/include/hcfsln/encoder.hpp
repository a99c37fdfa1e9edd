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

#ifndef HCFSLN_ENCODER_HPP_
#define HCFSLN_ENCODER_HPP_

#include <random>
#include <string>
#include <vector>

#include "hcfsln/tensor.hpp"

namespace hcfsln {

struct ModalityConfig {
  std::string name;
  std::size_t input_dim = 1;
  std::size_t seq_len = 120;
};

enum class Pooling { kMean, kLast };

struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;  // required when training with dropout
};

// Glorot-uniform initialised tensor; requires grad.
Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng);

struct MultiHeadAttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  std::size_t heads = 4;

  // wo/bo start at zero when zero_output is set, so the block's residual
  // path begins as the identity.
  static MultiHeadAttentionParams init(std::size_t dim, std::size_t heads,
                                       std::mt19937_64& rng, bool zero_output);
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

// Self-attention over the rows of x ([tokens, d]) with output projection.
Tensor multi_head_attention(const Tensor& x, const MultiHeadAttentionParams& p);

struct EncoderParams {
  Tensor conv1_w, conv1_b;  // [3, d_m, d'], [d']
  Tensor conv2_w, conv2_b;  // [5, d', d'], [d']
  Tensor dense_w, dense_b;  // [d', d'], [d']
  MultiHeadAttentionParams attn;
  Tensor ln_gain, ln_bias;  // [d']
  double dropout = 0.1;

  static EncoderParams init(const ModalityConfig& modality,
                            std::size_t embed_dim, std::size_t heads,
                            double dropout, std::mt19937_64& rng);
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

inline constexpr std::size_t kConv1Width = 3;
inline constexpr std::size_t kConv2Width = 5;

// conv(3) -> conv(5) -> dense+ReLU+dropout -> self-attention -> residual
// add -> layer norm -> pooling over time. x: [L, d_m] -> [d'].
Tensor encode_modality(const Tensor& x, const EncoderParams& params,
                       const ModalityConfig& modality, Pooling pooling,
                       ForwardContext& ctx);

struct CrossModalParams {
  MultiHeadAttentionParams attn;
  Tensor ln_gain, ln_bias;

  static CrossModalParams init(std::size_t embed_dim, std::size_t heads,
                               std::mt19937_64& rng);
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

// layer_norm(S + MHA(S)) over the M modality tokens S: [M, d'].
Tensor cross_modal_attention(const Tensor& stacked, const CrossModalParams& p);

struct GatingParams {
  Tensor w;  // [d'] -> one score per modality

  static GatingParams init(std::size_t embed_dim, std::mt19937_64& rng);
  void collect(std::vector<NamedTensor>& out, const std::string& prefix) const;
};

struct FusedEmbedding {
  Tensor h;        // [d']
  Tensor weights;  // [M], softmax of the modality scores
};

FusedEmbedding gate_fuse(const Tensor& refined, const GatingParams& gating);

}  // namespace hcfsln

#endif  // HCFSLN_ENCODER_HPP_
