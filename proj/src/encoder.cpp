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

#include "hcfsln/encoder.hpp"

#include <cmath>

namespace hcfsln {

Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                      std::mt19937_64& rng) {
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> unif(-limit, limit);
  std::vector<double> values(shape_size(shape));
  for (auto& v : values) v = unif(rng);
  return Tensor::from(std::move(shape), std::move(values), true);
}

MultiHeadAttentionParams MultiHeadAttentionParams::init(std::size_t dim,
                                                        std::size_t heads,
                                                        std::mt19937_64& rng,
                                                        bool zero_output) {
  if (heads == 0 || dim % heads != 0) {
    throw std::invalid_argument("attention: heads (" + std::to_string(heads) +
                                ") must divide embedding dim (" +
                                std::to_string(dim) + ")");
  }
  MultiHeadAttentionParams p;
  p.heads = heads;
  p.wq = glorot_uniform({dim, dim}, dim, dim, rng);
  p.bq = Tensor::zeros({dim}, true);
  p.wk = glorot_uniform({dim, dim}, dim, dim, rng);
  p.bk = Tensor::zeros({dim}, true);
  p.wv = glorot_uniform({dim, dim}, dim, dim, rng);
  p.bv = Tensor::zeros({dim}, true);
  p.wo = zero_output ? Tensor::zeros({dim, dim}, true)
                     : glorot_uniform({dim, dim}, dim, dim, rng);
  p.bo = Tensor::zeros({dim}, true);
  return p;
}

void MultiHeadAttentionParams::collect(std::vector<NamedTensor>& out,
                                       const std::string& prefix) const {
  out.push_back({prefix + ".wq", wq});
  out.push_back({prefix + ".bq", bq});
  out.push_back({prefix + ".wk", wk});
  out.push_back({prefix + ".bk", bk});
  out.push_back({prefix + ".wv", wv});
  out.push_back({prefix + ".bv", bv});
  out.push_back({prefix + ".wo", wo});
  out.push_back({prefix + ".bo", bo});
}

Tensor multi_head_attention(const Tensor& x, const MultiHeadAttentionParams& p) {
  const Tensor q = add(matmul(x, p.wq), p.bq);
  const Tensor k = add(matmul(x, p.wk), p.bk);
  const Tensor v = add(matmul(x, p.wv), p.bv);
  return add(matmul(attention(q, k, v, p.heads), p.wo), p.bo);
}

EncoderParams EncoderParams::init(const ModalityConfig& modality,
                                  std::size_t embed_dim, std::size_t heads,
                                  double dropout, std::mt19937_64& rng) {
  const std::size_t dm = modality.input_dim;
  const std::size_t d = embed_dim;
  EncoderParams p;
  p.conv1_w = glorot_uniform({kConv1Width, dm, d}, kConv1Width * dm,
                             kConv1Width * d, rng);
  p.conv1_b = Tensor::zeros({d}, true);
  p.conv2_w = glorot_uniform({kConv2Width, d, d}, kConv2Width * d,
                             kConv2Width * d, rng);
  p.conv2_b = Tensor::zeros({d}, true);
  p.dense_w = glorot_uniform({d, d}, d, d, rng);
  p.dense_b = Tensor::zeros({d}, true);
  p.attn = MultiHeadAttentionParams::init(d, heads, rng, /*zero_output=*/true);
  p.ln_gain = Tensor::full({d}, 1.0, true);
  p.ln_bias = Tensor::zeros({d}, true);
  p.dropout = dropout;
  return p;
}

void EncoderParams::collect(std::vector<NamedTensor>& out,
                            const std::string& prefix) const {
  out.push_back({prefix + ".conv1_w", conv1_w});
  out.push_back({prefix + ".conv1_b", conv1_b});
  out.push_back({prefix + ".conv2_w", conv2_w});
  out.push_back({prefix + ".conv2_b", conv2_b});
  out.push_back({prefix + ".dense_w", dense_w});
  out.push_back({prefix + ".dense_b", dense_b});
  attn.collect(out, prefix + ".attn");
  out.push_back({prefix + ".ln_gain", ln_gain});
  out.push_back({prefix + ".ln_bias", ln_bias});
}

Tensor encode_modality(const Tensor& x, const EncoderParams& params,
                       const ModalityConfig& modality, Pooling pooling,
                       ForwardContext& ctx) {
  if (x.rank() != 2 || x.dim(0) != modality.seq_len ||
      x.dim(1) != modality.input_dim) {
    throw ShapeError("encode_modality(" + modality.name + "): expected [" +
                     std::to_string(modality.seq_len) + "," +
                     std::to_string(modality.input_dim) + "], got " +
                     shape_string(x.shape()));
  }
  const Tensor c1 = relu(conv1d(x, params.conv1_w, params.conv1_b));
  const Tensor c2 = relu(conv1d(c1, params.conv2_w, params.conv2_b));
  Tensor dense = relu(add(matmul(c2, params.dense_w), params.dense_b));
  if (ctx.training && params.dropout > 0.0) {
    if (ctx.rng == nullptr) {
      throw std::invalid_argument("encode_modality: training needs an rng");
    }
    dense = dropout(dense, params.dropout, *ctx.rng, true);
  }
  const Tensor attended = multi_head_attention(dense, params.attn);
  const Tensor normed =
      layer_norm(add(dense, attended), params.ln_gain, params.ln_bias);
  if (pooling == Pooling::kLast) return row(normed, normed.dim(0) - 1);
  return mean_rows(normed);
}

CrossModalParams CrossModalParams::init(std::size_t embed_dim,
                                        std::size_t heads,
                                        std::mt19937_64& rng) {
  CrossModalParams p;
  p.attn = MultiHeadAttentionParams::init(embed_dim, heads, rng,
                                          /*zero_output=*/true);
  // Unit-norm refined tokens at init keep tanh(alpha |h|) off its plateau.
  p.ln_gain = Tensor::full({embed_dim},
                           1.0 / std::sqrt(static_cast<double>(embed_dim)), true);
  p.ln_bias = Tensor::zeros({embed_dim}, true);
  return p;
}

void CrossModalParams::collect(std::vector<NamedTensor>& out,
                               const std::string& prefix) const {
  attn.collect(out, prefix + ".attn");
  out.push_back({prefix + ".ln_gain", ln_gain});
  out.push_back({prefix + ".ln_bias", ln_bias});
}

Tensor cross_modal_attention(const Tensor& stacked, const CrossModalParams& p) {
  if (stacked.rank() != 2 || stacked.dim(0) == 0) {
    throw ShapeError("cross_modal_attention: expected [M, d'], got " +
                     shape_string(stacked.shape()));
  }
  return layer_norm(add(stacked, multi_head_attention(stacked, p.attn)),
                    p.ln_gain, p.ln_bias);
}

GatingParams GatingParams::init(std::size_t embed_dim, std::mt19937_64& rng) {
  return {glorot_uniform({embed_dim}, embed_dim, 1, rng)};
}

void GatingParams::collect(std::vector<NamedTensor>& out,
                           const std::string& prefix) const {
  out.push_back({prefix + ".w", w});
}

FusedEmbedding gate_fuse(const Tensor& refined, const GatingParams& gating) {
  if (refined.rank() != 2 || refined.dim(1) != gating.w.size()) {
    throw ShapeError("gate_fuse: refined " + shape_string(refined.shape()) +
                     " does not match gating width " +
                     std::to_string(gating.w.size()));
  }
  const Tensor weights = softmax(matmul(refined, gating.w));
  return {matmul(weights, refined), weights};
}

}  // namespace hcfsln
