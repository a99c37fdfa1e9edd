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

#include "hcfsln/fewshot.hpp"

#include <algorithm>
#include <numeric>

namespace hcfsln {

using geometry::PoincarePoint;

Episode sample_episode(std::span<const Sample> pool, const EpisodeSpec& spec,
                       std::mt19937_64& rng) {
  if (spec.k < 1 || spec.b < 1) {
    throw std::invalid_argument("episode spec needs K >= 1 and B >= 1");
  }
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const int label = pool[i].label;
    if (label < 0 || label >= kNumClasses) {
      throw std::invalid_argument("sample " + std::to_string(pool[i].id) +
                                  " has label outside {0,1}");
    }
    by_class[static_cast<std::size_t>(label)].push_back(i);
  }
  const std::size_t need = spec.k + spec.b;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto have = by_class[static_cast<std::size_t>(c)].size();
    if (have < need) {
      throw InsufficientSamplesError(
          "class " + std::to_string(c) + " has " + std::to_string(have) +
          " samples, episode needs K+B=" + std::to_string(need));
    }
  }
  Episode ep;
  for (auto& members : by_class) {
    // Partial Fisher-Yates: the first `need` slots are a uniform draw.
    for (std::size_t i = 0; i < need; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
    }
    ep.support.insert(ep.support.end(), members.begin(), members.begin() + spec.k);
    ep.query.insert(ep.query.end(), members.begin() + spec.k, members.begin() + need);
  }
  return ep;
}

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kProtoOnly: return "proto";
    case LossMode::kAngularOnly: return "angular";
    case LossMode::kCombined: return "combined";
  }
  return "combined";
}

LossMode parse_loss_mode(const std::string& text) {
  if (text == "proto") return LossMode::kProtoOnly;
  if (text == "angular") return LossMode::kAngularOnly;
  if (text == "combined") return LossMode::kCombined;
  throw std::invalid_argument("loss mode must be proto|angular|combined, got '" +
                              text + "'");
}

std::string to_string(AngularForm form) {
  return form == AngularForm::kCorrected ? "corrected" : "literal";
}

AngularForm parse_angular_form(const std::string& text) {
  if (text == "corrected") return AngularForm::kCorrected;
  if (text == "literal") return AngularForm::kLiteral;
  throw std::invalid_argument("angular form must be corrected|literal, got '" +
                              text + "'");
}

FusedEmbedding fuse_sample(const Sample& sample, const ModelParams& params,
                           ForwardContext& ctx) {
  const auto configs = params.modality_configs();
  if (sample.modalities.size() != configs.size()) {
    throw ShapeError("sample " + std::to_string(sample.id) + " has " +
                     std::to_string(sample.modalities.size()) +
                     " modalities, model expects " +
                     std::to_string(configs.size()));
  }
  std::vector<Tensor> per_modality;
  per_modality.reserve(configs.size());
  for (std::size_t m = 0; m < configs.size(); ++m) {
    const Tensor x = Tensor::from({configs[m].seq_len, configs[m].input_dim},
                                  sample.modalities[m]);
    per_modality.push_back(encode_modality(x, params.encoders[m], configs[m],
                                           params.options.pooling, ctx));
  }
  const Tensor refined = cross_modal_attention(stack(per_modality), params.cross);
  return gate_fuse(refined, params.gating);
}

PoincarePoint embed(const Sample& sample, const ModelParams& params,
                    ForwardContext& ctx) {
  const FusedEmbedding fused = fuse_sample(sample, params, ctx);
  const Tensor alpha = params.curvature.alpha();
  const PoincarePoint y = geometry::project(fused.h, alpha);
  return geometry::residual_hyperbolic_block(y, params.residual, alpha);
}

PrototypePair compute_prototypes(const std::vector<PoincarePoint>& support,
                                 const std::vector<int>& labels) {
  if (support.size() != labels.size()) {
    throw std::invalid_argument("compute_prototypes: embeddings/labels size mismatch");
  }
  std::array<std::vector<PoincarePoint>, kNumClasses> groups;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses) {
      throw std::invalid_argument("compute_prototypes: label outside {0,1}");
    }
    groups[static_cast<std::size_t>(labels[i])].push_back(support[i]);
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (groups[static_cast<std::size_t>(c)].empty()) {
      throw std::invalid_argument("compute_prototypes: class " + std::to_string(c) +
                                  " has no support embedding");
    }
  }
  return {Prototype{0, geometry::weighted_prototype(groups[0]).point},
          Prototype{1, geometry::weighted_prototype(groups[1]).point}};
}

Tensor prototype_distances(const PoincarePoint& query,
                           const PrototypePair& prototypes) {
  return stack({geometry::poincare_distance(query, prototypes[0].point),
                geometry::poincare_distance(query, prototypes[1].point)});
}

Tensor classify(const PoincarePoint& query, const PrototypePair& prototypes) {
  return softmax(neg(prototype_distances(query, prototypes)));
}

Tensor classify_log(const PoincarePoint& query, const PrototypePair& prototypes) {
  return log_softmax(neg(prototype_distances(query, prototypes)));
}

Tensor proto_loss(const std::vector<Tensor>& log_probs,
                  const std::vector<int>& labels) {
  if (log_probs.empty() || log_probs.size() != labels.size()) {
    throw std::invalid_argument("proto_loss: need one label per query");
  }
  std::vector<Tensor> terms;
  terms.reserve(log_probs.size());
  for (std::size_t i = 0; i < log_probs.size(); ++i)
    terms.push_back(element(log_probs[i], static_cast<std::size_t>(labels[i])));
  return neg(mean(stack(terms)));
}

Tensor angular_margin_term(const Tensor& cos_true, const Tensor& cos_other,
                           double gamma, AngularForm form) {
  if (form == AngularForm::kCorrected) {
    return relu(add_scalar(sub(cos_other, cos_true), gamma));
  }
  return relu(add_scalar(sub(cos_true, cos_other), gamma));
}

Tensor angular_loss(const std::vector<PoincarePoint>& queries,
                    const std::vector<int>& labels,
                    const PrototypePair& prototypes, double gamma,
                    AngularForm form) {
  if (queries.empty() || queries.size() != labels.size()) {
    throw std::invalid_argument("angular_loss: need one label per query");
  }
  std::vector<Tensor> terms;
  terms.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto c = static_cast<std::size_t>(labels[i]);
    const Tensor& q = queries[i].coords();
    const Tensor cos_true = cosine_similarity(q, prototypes[c].point.coords());
    // Binary task: the only other class is the hardest one.
    const Tensor cos_other = cosine_similarity(q, prototypes[1 - c].point.coords());
    terms.push_back(angular_margin_term(cos_true, cos_other, gamma, form));
  }
  return mean(stack(terms));
}

Tensor total_loss(const Tensor& proto, const Tensor& angular,
                  const LossConfig& config) {
  switch (config.mode) {
    case LossMode::kProtoOnly: return proto;
    case LossMode::kAngularOnly: return scale(angular, config.lambda);
    case LossMode::kCombined: break;
  }
  return add(proto, scale(angular, config.lambda));
}

namespace {

int argmin2(std::span<const double> d) { return d[1] < d[0] ? 1 : 0; }

EpisodeResult run_hyperbolic(std::span<const Sample> pool, const Episode& ep,
                             const ModelParams& params, const LossConfig& loss,
                             ForwardContext& ctx) {
  EpisodeResult res;
  auto checked = [&](PoincarePoint y) {
    const double n = y.norm();
    ++res.embeddings;
    res.max_embedding_norm = std::max(res.max_embedding_norm, n);
    if (n > geometry::kMaxNorm + geometry::kNormSlack) {
      throw NumericError("embedding norm " + std::to_string(n) +
                         " exceeds the ball margin");
    }
    return y;
  };
  std::vector<PoincarePoint> support;
  std::vector<int> support_labels;
  for (auto i : ep.support) {
    support.push_back(checked(embed(pool[i], params, ctx)));
    support_labels.push_back(pool[i].label);
  }
  const PrototypePair protos = compute_prototypes(support, support_labels);
  for (const auto& p : protos) checked(p.point);

  std::vector<PoincarePoint> queries;
  std::vector<int> labels;
  std::vector<Tensor> log_probs;
  for (auto i : ep.query) {
    queries.push_back(checked(embed(pool[i], params, ctx)));
    labels.push_back(pool[i].label);
    const Tensor dist = prototype_distances(queries.back(), protos);
    log_probs.push_back(log_softmax(neg(dist)));
    const int pred = argmin2(dist.values());
    res.predictions.push_back(pred);
    res.correct += pred == labels.back() ? 1 : 0;
  }
  res.total = queries.size();
  const Tensor lp = proto_loss(log_probs, labels);
  const Tensor la = angular_loss(queries, labels, protos, loss.gamma, loss.angular_form);
  res.loss = total_loss(lp, la, loss);
  return res;
}

EpisodeResult run_euclidean(std::span<const Sample> pool, const Episode& ep,
                            const ModelParams& params, ForwardContext& ctx) {
  EpisodeResult res;
  std::array<std::vector<Tensor>, kNumClasses> groups;
  for (auto i : ep.support) {
    groups[static_cast<std::size_t>(pool[i].label)].push_back(
        fuse_sample(pool[i], params, ctx).h);
  }
  std::array<Tensor, kNumClasses> protos;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (groups[c].empty()) {
      throw std::invalid_argument("episode has no support sample for class " +
                                  std::to_string(c));
    }
    protos[c] = mean_rows(stack(groups[c]));
  }
  std::vector<int> labels;
  std::vector<Tensor> log_probs;
  for (auto i : ep.query) {
    const Tensor h = fuse_sample(pool[i], params, ctx).h;
    ++res.embeddings;
    labels.push_back(pool[i].label);
    const Tensor dist = stack({sum_squares(sub(h, protos[0])),
                               sum_squares(sub(h, protos[1]))});
    log_probs.push_back(log_softmax(neg(dist)));
    const int pred = argmin2(dist.values());
    res.predictions.push_back(pred);
    res.correct += pred == labels.back() ? 1 : 0;
  }
  res.total = labels.size();
  res.loss = proto_loss(log_probs, labels);
  return res;
}

}  // namespace

EpisodeResult run_episode(std::span<const Sample> pool, const Episode& episode,
                          const ModelParams& params, const LossConfig& loss,
                          ForwardContext& ctx) {
  if (params.options.kind == ModelKind::kEuclidean) {
    return run_euclidean(pool, episode, params, ctx);
  }
  return run_hyperbolic(pool, episode, params, loss, ctx);
}

}  // namespace hcfsln
