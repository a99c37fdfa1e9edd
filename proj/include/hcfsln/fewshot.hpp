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

#ifndef HCFSLN_FEWSHOT_HPP_
#define HCFSLN_FEWSHOT_HPP_

#include <array>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcfsln/data.hpp"
#include "hcfsln/geometry.hpp"
#include "hcfsln/model.hpp"

namespace hcfsln {

inline constexpr int kNumClasses = 2;

struct EpisodeSpec {
  std::size_t k = 1;  // support shots per class
  std::size_t b = 4;  // queries per class

  std::size_t support_size() const { return kNumClasses * k; }
  std::size_t query_size() const { return kNumClasses * b; }
};

// Indices into the pool the episode was drawn from.
struct Episode {
  std::vector<std::size_t> support;
  std::vector<std::size_t> query;
};

class InsufficientSamplesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Per class, K + B distinct samples drawn uniformly without replacement; the
// first K go to support. Support lists class 0 then class 1, same for query.
Episode sample_episode(std::span<const Sample> pool, const EpisodeSpec& spec,
                       std::mt19937_64& rng);

enum class LossMode { kProtoOnly, kAngularOnly, kCombined };
enum class AngularForm { kCorrected, kLiteral };

std::string to_string(LossMode mode);
LossMode parse_loss_mode(const std::string& text);
std::string to_string(AngularForm form);
AngularForm parse_angular_form(const std::string& text);

struct LossConfig {
  double gamma = 0.2;
  double lambda = 1.0;
  LossMode mode = LossMode::kCombined;
  AngularForm angular_form = AngularForm::kCorrected;
};

// Modality encoders -> cross-modal attention -> gated fusion.
FusedEmbedding fuse_sample(const Sample& sample, const ModelParams& params,
                           ForwardContext& ctx);

// fuse_sample, then projection into the ball and the residual block.
geometry::PoincarePoint embed(const Sample& sample, const ModelParams& params,
                              ForwardContext& ctx);

struct Prototype {
  int class_id = 0;
  geometry::PoincarePoint point;
};

using PrototypePair = std::array<Prototype, kNumClasses>;

// Weighted hyperbolic prototype per class. Throws std::invalid_argument when
// a class has no support embedding.
PrototypePair compute_prototypes(
    const std::vector<geometry::PoincarePoint>& support,
    const std::vector<int>& labels);

// [d(q, p_0), d(q, p_1)]
Tensor prototype_distances(const geometry::PoincarePoint& query,
                           const PrototypePair& prototypes);

// Softmax over negative distances, [2].
Tensor classify(const geometry::PoincarePoint& query,
                const PrototypePair& prototypes);
Tensor classify_log(const geometry::PoincarePoint& query,
                    const PrototypePair& prototypes);

// Mean over queries of -log p(true class), from log-probability vectors.
Tensor proto_loss(const std::vector<Tensor>& log_probs,
                  const std::vector<int>& labels);

// Hinge on cosine similarities between query and prototype coordinates.
// corrected: max(0, gamma - cos(q, p_true) + cos(q, p_other))
// literal:   max(0, cos(q, p_true) + gamma - cos(q, p_other))
Tensor angular_margin_term(const Tensor& cos_true, const Tensor& cos_other,
                           double gamma, AngularForm form);
Tensor angular_loss(const std::vector<geometry::PoincarePoint>& queries,
                    const std::vector<int>& labels,
                    const PrototypePair& prototypes, double gamma,
                    AngularForm form);

// proto + lambda * angular, with either term dropped by the mode.
Tensor total_loss(const Tensor& proto, const Tensor& angular,
                  const LossConfig& config);

struct EpisodeResult {
  Tensor loss;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<int> predictions;
  std::size_t embeddings = 0;
  double max_embedding_norm = 0.0;
};

// Embeds support and query, builds prototypes and scores the queries.
// Hyperbolic models throw NumericError if any embedding leaves the ball
// margin. Euclidean models use mean prototypes and squared distances on
// the fused vector, with the prototypical loss only.
EpisodeResult run_episode(std::span<const Sample> pool, const Episode& episode,
                          const ModelParams& params, const LossConfig& loss,
                          ForwardContext& ctx);

}  // namespace hcfsln

#endif  // HCFSLN_FEWSHOT_HPP_
