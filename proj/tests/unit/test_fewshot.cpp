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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "hcfsln/fewshot.hpp"

using namespace hcfsln;
using geometry::PoincarePoint;

namespace {

std::vector<Sample> make_pool(std::size_t n0, std::size_t n1, const DatasetMeta& meta,
                              std::uint64_t seed = 9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::vector<Sample> pool;
  for (std::size_t i = 0; i < n0 + n1; ++i) {
    Sample s;
    s.id = i;
    s.label = i < n0 ? 0 : 1;
    for (const auto& m : meta.modalities) {
      std::vector<double> seq(meta.seq_len * m.dim);
      for (auto& v : seq) v = n01(rng);
      s.modalities.push_back(std::move(seq));
    }
    pool.push_back(std::move(s));
  }
  return pool;
}

DatasetMeta small_meta() {
  DatasetMeta meta;
  meta.modalities = {{"a", 2}, {"b", 3}};
  meta.seq_len = 6;
  return meta;
}

PoincarePoint pt(std::vector<double> v) {
  const std::size_t n = v.size();
  return PoincarePoint(Tensor::from({n}, std::move(v)));
}

double oracle_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0, nb = 0, diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] * a[i];
    nb += b[i] * b[i];
    diff += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::acosh(1.0 + 2.0 * diff / ((1.0 - na) * (1.0 - nb)));
}

}  // namespace

TEST_CASE("episode sizes and disjointness") {
  const auto meta = small_meta();
  const auto pool = make_pool(7, 9, meta);
  std::mt19937_64 rng(1);
  const Episode ep = sample_episode(pool, {1, 2}, rng);
  CHECK(ep.support.size() == 2);
  CHECK(ep.query.size() == 4);
  CHECK(pool[ep.support[0]].label == 0);
  CHECK(pool[ep.support[1]].label == 1);
  CHECK(pool[ep.query[0]].label == 0);
  CHECK(pool[ep.query[1]].label == 0);
  CHECK(pool[ep.query[2]].label == 1);
  std::set<std::size_t> all(ep.support.begin(), ep.support.end());
  all.insert(ep.query.begin(), ep.query.end());
  CHECK(all.size() == 6);
}

TEST_CASE("a pool with exactly K+B per class is fully consumed") {
  const auto pool = make_pool(5, 5, small_meta());
  std::mt19937_64 rng(2);
  const Episode ep = sample_episode(pool, {2, 3}, rng);
  std::set<std::size_t> all(ep.support.begin(), ep.support.end());
  all.insert(ep.query.begin(), ep.query.end());
  CHECK(all.size() == 10);
}

TEST_CASE("an undersized class is named in the error") {
  const auto pool = make_pool(5, 4, small_meta());
  std::mt19937_64 rng(3);
  try {
    sample_episode(pool, {2, 3}, rng);
    FAIL("expected InsufficientSamplesError");
  } catch (const InsufficientSamplesError& e) {
    CHECK(std::string(e.what()).find("class 1") != std::string::npos);
  }
}

TEST_CASE("episodes are deterministic per seed") {
  const auto pool = make_pool(20, 20, small_meta());
  std::mt19937_64 a(4), b(4);
  for (int i = 0; i < 50; ++i) {
    const Episode x = sample_episode(pool, {5, 4}, a);
    const Episode y = sample_episode(pool, {5, 4}, b);
    CHECK(x.support == y.support);
    CHECK(x.query == y.query);
  }
}

TEST_CASE("zero sample embeds at the origin, identical samples embed identically") {
  const auto meta = small_meta();
  ModelOptions options;
  options.embed_dim = 8;
  options.heads = 2;
  const auto params = ModelParams::init(meta, options, 3);
  auto pool = make_pool(1, 1, meta);
  for (auto& m : pool[0].modalities) std::fill(m.begin(), m.end(), 0.0);
  ForwardContext ctx{false, nullptr};
  CHECK(embed(pool[0], params, ctx).norm() < 1e-12);
  const auto a = embed(pool[1], params, ctx);
  const auto b = embed(pool[1], params, ctx);
  for (std::size_t i = 0; i < 8; ++i) CHECK(a.coords().at(i) == b.coords().at(i));
  CHECK(a.norm() < 1.0);
}

TEST_CASE("prototypes") {
  SUBCASE("K=1 returns the support embedding") {
    const auto protos = compute_prototypes({pt({0.1, 0.2}), pt({-0.3, 0.0})}, {0, 1});
    CHECK(protos[0].class_id == 0);
    CHECK(protos[0].point.coords().at(1) == doctest::Approx(0.2));
    CHECK(protos[1].point.coords().at(0) == doctest::Approx(-0.3));
  }
  SUBCASE("K=5 identical embeddings") {
    std::vector<PoincarePoint> s;
    std::vector<int> labels;
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < 5; ++k) {
        s.push_back(pt({0.2 * (c + 1), -0.1}));
        labels.push_back(c);
      }
    const auto protos = compute_prototypes(s, labels);
    CHECK(protos[1].point.coords().at(0) == doctest::Approx(0.4));
  }
  SUBCASE("K=3 collinear points match a brute-force reimplementation") {
    const std::vector<std::vector<double>> raw{{0.1, 0.0}, {0.2, 0.0}, {0.6, 0.0}};
    std::vector<double> mean(2, 0.0);
    for (const auto& p : raw) mean[0] += p[0] / 3;
    std::vector<double> w;
    double z = 0;
    for (const auto& p : raw) {
      w.push_back(std::exp(-oracle_distance(p, mean)));
      z += w.back();
    }
    double expect = 0;
    for (int i = 0; i < 3; ++i) expect += w[i] / z * raw[i][0];
    std::vector<PoincarePoint> s{pt(raw[0]), pt(raw[1]), pt(raw[2]), pt({0, 0.1}),
                                 pt({0, 0.2}), pt({0, 0.3})};
    const auto protos = compute_prototypes(s, {0, 0, 0, 1, 1, 1});
    CHECK(protos[0].point.coords().at(0) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK_THROWS_AS(compute_prototypes({pt({0.1, 0.0})}, {0}), std::invalid_argument);
}

TEST_CASE("classification probabilities") {
  const PoincarePoint origin = pt({0.0, 0.0});
  SUBCASE("equidistant") {
    const PrototypePair protos{{{0, pt({0.3, 0.0})}, {1, pt({0.0, -0.3})}}};
    const Tensor p = classify(origin, protos);
    CHECK(p.at(0) == doctest::Approx(0.5));
  }
  SUBCASE("d0 = 1, d1 = 2") {
    // d(0, x) = 2 artanh |x|, so |x| = tanh(d / 2).
    const PrototypePair protos{{{0, pt({std::tanh(0.5), 0.0})}, {1, pt({0.0, std::tanh(1.0)})}}};
    const Tensor d = prototype_distances(origin, protos);
    CHECK(d.at(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.at(1) == doctest::Approx(2.0).epsilon(1e-12));
    const Tensor p = classify(origin, protos);
    CHECK(p.at(0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
    CHECK(p.at(0) == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK(std::exp(classify_log(origin, protos).at(0)) == doctest::Approx(p.at(0)));
  }
  SUBCASE("query on prototype 0") {
    const PrototypePair protos{{{0, pt({0.2, 0.1})}, {1, pt({-0.5, 0.0})}}};
    CHECK(classify(pt({0.2, 0.1}), protos).at(0) > 0.5);
  }
}

TEST_CASE("prototypical loss") {
  const Tensor sure = log_softmax(Tensor::from({2}, {0.0, -60.0}));
  CHECK(proto_loss({sure}, {0}).item() == doctest::Approx(0.0).epsilon(1e-12));
  const Tensor half = log_softmax(Tensor::from({2}, {0.0, 0.0}));
  CHECK(proto_loss({half}, {1}).item() == doctest::Approx(std::log(2.0)));
  const Tensor a = log_softmax(Tensor::from({2}, {0.3, -0.4}));
  const Tensor b = log_softmax(Tensor::from({2}, {-1.0, 0.5}));
  const double la = -a.at(0), lb = -b.at(1);
  CHECK(proto_loss({a, b}, {0, 1}).item() == doctest::Approx((la + lb) / 2));
}

TEST_CASE("angular margin term") {
  auto term = [](double t, double o, AngularForm f) {
    return angular_margin_term(Tensor::scalar(t), Tensor::scalar(o), 0.2, f).item();
  };
  CHECK(term(0.9, 0.1, AngularForm::kCorrected) == 0.0);
  CHECK(term(0.5, 0.6, AngularForm::kCorrected) == doctest::Approx(0.3));
  CHECK(term(0.4, 0.4, AngularForm::kCorrected) == doctest::Approx(0.2));
  CHECK(term(0.9, 0.1, AngularForm::kLiteral) == doctest::Approx(1.0));
  CHECK(term(0.1, 0.9, AngularForm::kLiteral) == 0.0);
}

TEST_CASE("total loss") {
  auto total = [](double proto, double ang, double lambda, LossMode mode) {
    LossConfig c;
    c.lambda = lambda;
    c.mode = mode;
    return total_loss(Tensor::scalar(proto), Tensor::scalar(ang), c).item();
  };
  CHECK(total(0.7, 0.3, 0.0, LossMode::kCombined) == doctest::Approx(0.7));
  CHECK(total(0.5, 0.3, 1.0, LossMode::kCombined) == doctest::Approx(0.8));
  CHECK(total(0.1, 0.4, 0.25, LossMode::kCombined) == doctest::Approx(0.2));
  CHECK(total(0.1, 0.4, 0.25, LossMode::kProtoOnly) == doctest::Approx(0.1));
  CHECK(total(0.1, 0.4, 0.25, LossMode::kAngularOnly) == doctest::Approx(0.1));
}

TEST_CASE("loss mode and angular form names round-trip") {
  for (auto m : {LossMode::kProtoOnly, LossMode::kAngularOnly, LossMode::kCombined})
    CHECK(parse_loss_mode(to_string(m)) == m);
  for (auto f : {AngularForm::kCorrected, AngularForm::kLiteral})
    CHECK(parse_angular_form(to_string(f)) == f);
  CHECK_THROWS(parse_loss_mode("protos"));
}

TEST_CASE("run_episode scores every query and keeps embeddings in the ball") {
  const auto meta = small_meta();
  ModelOptions options;
  options.embed_dim = 8;
  options.heads = 2;
  const auto params = ModelParams::init(meta, options, 5);
  const auto pool = make_pool(6, 6, meta);
  std::mt19937_64 rng(7);
  const Episode ep = sample_episode(pool, {1, 4}, rng);
  ForwardContext ctx{false, nullptr};
  const auto res = run_episode(pool, ep, params, LossConfig{}, ctx);
  CHECK(res.total == 8);
  CHECK(res.predictions.size() == 8);
  CHECK(res.embeddings == 12);  // support, query and both prototypes
  CHECK(res.max_embedding_norm <= geometry::kMaxNorm);
  CHECK(std::isfinite(res.loss.item()));
  Tape::current().clear();

  options.kind = ModelKind::kEuclidean;
  const auto euclid = ModelParams::init(meta, options, 5);
  const auto eres = run_episode(pool, ep, euclid, LossConfig{}, ctx);
  CHECK(eres.total == 8);
  Tape::current().clear();
}
