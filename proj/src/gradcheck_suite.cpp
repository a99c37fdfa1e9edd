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

#include "hcfsln/gradcheck_suite.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "hcfsln/fewshot.hpp"
#include "hcfsln/geometry.hpp"
#include "hcfsln/model.hpp"

namespace hcfsln {

namespace {

using geometry::PoincarePoint;

class Inputs {
 public:
  explicit Inputs(std::uint64_t seed) : rng_(seed) {}

  Tensor uniform(Shape shape, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = u(rng_);
    Tensor t = Tensor::from(std::move(shape), std::move(v));
    t.set_requires_grad(true);
    return t;
  }
  // Magnitudes in [lo, hi], random sign.
  Tensor signed_away(Shape shape, double lo, double hi) {
    Tensor t = uniform(std::move(shape), lo, hi);
    std::bernoulli_distribution coin(0.5);
    for (auto& x : t.mutable_values())
      if (coin(rng_)) x = -x;
    return t;
  }
  // Constant weights that make sum(w * y) depend on every output entry.
  Tensor weights(const Shape& shape) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = u(rng_);
    return Tensor::from(shape, std::move(v));
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

struct Case {
  std::string name;
  std::function<Tensor()> f;
  std::vector<Tensor> params;
};

// Scalar readout of a tensor-valued op.
std::function<Tensor()> readout(Inputs& in, const Shape& out_shape,
                                std::function<Tensor()> op) {
  Tensor w = in.weights(out_shape);
  return [w, op] {
    Tensor y = op();
    return y.shape().empty() ? mul(y, w) : sum(mul(y, w));
  };
}

std::vector<Case> primitive_cases(Inputs& in) {
  std::vector<Case> cases;
  auto unary = [&](std::string name, Tensor x, std::function<Tensor(const Tensor&)> op) {
    const Shape out = op(x).shape();
    cases.push_back({std::move(name), readout(in, out, [x, op] { return op(x); }), {x}});
  };
  auto binary = [&](std::string name, Tensor a, Tensor b,
                    std::function<Tensor(const Tensor&, const Tensor&)> op) {
    const Shape out = op(a, b).shape();
    cases.push_back(
        {std::move(name), readout(in, out, [a, b, op] { return op(a, b); }), {a, b}});
  };

  binary("add", in.uniform({3, 4}, -1, 1), in.uniform({3, 4}, -1, 1), add);
  binary("add_broadcast", in.uniform({3, 4}, -1, 1), in.uniform({4}, -1, 1), add);
  binary("sub", in.uniform({3, 4}, -1, 1), in.uniform({3, 4}, -1, 1), sub);
  binary("sub_scalar", in.uniform({3, 4}, -1, 1), in.uniform({}, -1, 1), sub);
  binary("mul", in.uniform({3, 4}, -1, 1), in.uniform({3, 4}, -1, 1), mul);
  binary("mul_broadcast", in.uniform({3, 4}, -1, 1), in.uniform({4}, -1, 1), mul);
  binary("div", in.uniform({3, 4}, -1, 1), in.signed_away({3, 4}, 0.5, 2), div);
  binary("div_scalar", in.uniform({3, 4}, -1, 1), in.uniform({}, 0.5, 2), div);
  unary("add_scalar", in.uniform({5}, -1, 1), [](const Tensor& x) { return add_scalar(x, 0.7); });
  unary("scale", in.uniform({5}, -1, 1), [](const Tensor& x) { return scale(x, -1.3); });
  unary("neg", in.uniform({5}, -1, 1), [](const Tensor& x) { return neg(x); });
  unary("square", in.uniform({5}, -1, 1), [](const Tensor& x) { return square(x); });
  unary("sqrt", in.uniform({5}, 0.5, 2), [](const Tensor& x) { return sqrt(x); });
  unary("exp", in.uniform({5}, -1, 1), [](const Tensor& x) { return exp(x); });
  unary("log", in.uniform({5}, 0.5, 2), [](const Tensor& x) { return log(x); });
  unary("tanh", in.uniform({5}, -2, 2), [](const Tensor& x) { return tanh(x); });
  unary("relu", in.signed_away({6}, 0.1, 1), [](const Tensor& x) { return relu(x); });
  unary("acosh", in.uniform({5}, 1.2, 3), [](const Tensor& x) { return acosh(x); });
  unary("map_unary", in.uniform({5}, -1, 1), [](const Tensor& x) {
    return map_unary(
        x, [](double v) { return std::sin(v); }, [](double v) { return std::cos(v); },
        "sin");
  });
  unary("sum", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return sum(x); });
  unary("mean", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return mean(x); });
  unary("sum_squares", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return sum_squares(x); });
  binary("dot", in.uniform({6}, -1, 1), in.uniform({6}, -1, 1), dot);
  unary("mean_rows", in.uniform({4, 3}, -1, 1), [](const Tensor& x) { return mean_rows(x); });
  unary("reshape", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return reshape(x, {2, 6}); });
  unary("transpose", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return transpose(x); });
  unary("row", in.uniform({3, 4}, -1, 1), [](const Tensor& x) { return row(x, 1); });
  unary("element", in.uniform({5}, -1, 1), [](const Tensor& x) { return element(x, 3); });
  binary("stack", in.uniform({4}, -1, 1), in.uniform({4}, -1, 1),
         [](const Tensor& a, const Tensor& b) { return stack({a, b, a}); });
  binary("stack_scalars", in.uniform({}, -1, 1), in.uniform({}, -1, 1),
         [](const Tensor& a, const Tensor& b) { return stack({a, b}); });
  binary("matmul", in.uniform({3, 4}, -1, 1), in.uniform({4, 2}, -1, 1), matmul);
  binary("matmul_vec_mat", in.uniform({4}, -1, 1), in.uniform({4, 3}, -1, 1), matmul);
  binary("matmul_mat_vec", in.uniform({3, 4}, -1, 1), in.uniform({4}, -1, 1), matmul);
  unary("softmax", in.uniform({3, 5}, -2, 2), [](const Tensor& x) { return softmax(x); });
  unary("log_softmax", in.uniform({3, 5}, -2, 2), [](const Tensor& x) { return log_softmax(x); });
  binary("cosine_similarity", in.uniform({6}, -1, 1), in.uniform({6}, -1, 1),
         [](const Tensor& a, const Tensor& b) { return cosine_similarity(a, b); });

  {
    Tensor x = in.uniform({4, 6}, -2, 2);
    Tensor g = in.uniform({6}, 0.5, 1.5);
    Tensor b = in.uniform({6}, -0.5, 0.5);
    auto op = [x, g, b] { return layer_norm(x, g, b); };
    cases.push_back({"layer_norm", readout(in, {4, 6}, op), {x, g, b}});
  }
  {
    Tensor x = in.uniform({6, 3}, -1, 1);
    Tensor w = in.uniform({3, 3, 4}, -0.5, 0.5);
    Tensor b = in.uniform({4}, -0.5, 0.5);
    auto op = [x, w, b] { return conv1d(x, w, b); };
    cases.push_back({"conv1d", readout(in, {6, 4}, op), {x, w, b}});
  }
  {
    Tensor x = in.uniform({7, 2}, -1, 1);
    Tensor w = in.uniform({5, 2, 3}, -0.5, 0.5);
    Tensor b = in.uniform({3}, -0.5, 0.5);
    auto op = [x, w, b] { return conv1d(x, w, b); };
    cases.push_back({"conv1d_width5", readout(in, {7, 3}, op), {x, w, b}});
  }
  {
    Tensor q = in.uniform({5, 8}, -1, 1);
    Tensor k = in.uniform({5, 8}, -1, 1);
    Tensor v = in.uniform({5, 8}, -1, 1);
    auto op = [q, k, v] { return attention(q, k, v, 2); };
    cases.push_back({"attention", readout(in, {5, 8}, op), {q, k, v}});
  }
  {
    Tensor x = in.uniform({4, 5}, -1, 1);
    const std::uint64_t seed = in.rng()();
    auto op = [x, seed] {
      std::mt19937_64 rng(seed);
      return dropout(x, 0.3, rng, true);
    };
    cases.push_back({"dropout", readout(in, {4, 5}, op), {x}});
  }
  return cases;
}

std::vector<Case> geometry_cases(Inputs& in) {
  std::vector<Case> cases;
  {
    Tensor h = in.uniform({6}, -0.5, 0.5);
    Tensor rho = in.uniform({}, -0.3, 0.3);
    auto op = [h, rho] { return geometry::project(h, exp(rho)).coords(); };
    cases.push_back({"project", readout(in, {6}, op), {h, rho}});
  }
  {
    // Small argument, series branch.
    Tensor h = in.uniform({4}, -1e-5, 1e-5);
    Tensor rho = in.uniform({}, -0.3, 0.3);
    auto op = [h, rho] { return geometry::project(h, exp(rho)).coords(); };
    cases.push_back({"project_small", readout(in, {4}, op), {h, rho}});
  }
  {
    Tensor y = in.uniform({5}, 0.6, 0.9);
    auto op = [y] { return geometry::clip_to_ball(y); };
    cases.push_back({"clip_to_ball", readout(in, {5}, op), {y}});
  }
  {
    Tensor a = in.uniform({5}, -0.35, 0.35);
    Tensor b = in.uniform({5}, -0.35, 0.35);
    auto op = [a, b] {
      return geometry::poincare_distance(PoincarePoint(a), PoincarePoint(b));
    };
    cases.push_back({"poincare_distance", readout(in, {}, op), {a, b}});
  }
  {
    std::vector<Tensor> pts;
    for (int i = 0; i < 3; ++i) pts.push_back(in.uniform({4}, -0.4, 0.4));
    auto op = [pts] {
      std::vector<PoincarePoint> points;
      for (const auto& p : pts) points.emplace_back(p);
      return geometry::weighted_prototype(points).point.coords();
    };
    cases.push_back({"weighted_prototype", readout(in, {4}, op), pts});
  }
  {
    Tensor y = in.uniform({4}, -0.4, 0.4);
    Tensor w = in.uniform({4, 4}, -0.5, 0.5);
    Tensor b = in.uniform({4}, -0.5, 0.5);
    Tensor rho = in.uniform({}, -0.3, 0.3);
    auto op = [y, w, b, rho] {
      return geometry::residual_hyperbolic_block(PoincarePoint(y), {w, b}, exp(rho))
          .coords();
    };
    cases.push_back({"residual_block", readout(in, {4}, op), {y, w, b, rho}});
  }
  return cases;
}

Case episode_case(Inputs& in) {
  DatasetMeta meta;
  meta.modalities = {{"a", 3}, {"b", 2}};
  meta.seq_len = 8;
  ModelOptions options;
  options.embed_dim = 16;
  options.heads = 4;
  options.dropout = 0.0;
  const ModelParams params = ModelParams::init(meta, options, in.rng()());
  // Move the zero-initialised tensors off zero so their paths are exercised.
  std::normal_distribution<double> n01(0.0, 1.0);
  for (const auto& p : params.parameters()) {
    bool all_zero = true;
    for (double v : p.tensor.values()) all_zero = all_zero && v == 0.0;
    if (!all_zero) continue;
    for (auto& v : Tensor(p.tensor).mutable_values()) v = 0.1 * n01(in.rng());
  }

  auto pool = std::make_shared<std::vector<Sample>>();
  for (std::size_t i = 0; i < 4; ++i) {
    Sample s;
    s.id = i;
    s.label = i < 2 ? 0 : 1;
    for (const auto& m : meta.modalities) {
      std::vector<double> seq(meta.seq_len * m.dim);
      for (auto& v : seq) v = n01(in.rng()) + (s.label == 0 ? 0.5 : -0.5);
      s.modalities.push_back(std::move(seq));
    }
    pool->push_back(std::move(s));
  }
  const Episode episode{{0, 2}, {1, 3}};
  auto f = [params, pool, episode] {
    ForwardContext ctx{false, nullptr};
    return run_episode(*pool, episode, params, LossConfig{}, ctx).loss;
  };
  return {"episode_combined_loss", f, params.trainable()};
}

}  // namespace

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Inputs in(options.seed);
  std::vector<Case> cases = primitive_cases(in);
  for (auto& c : geometry_cases(in)) cases.push_back(std::move(c));
  if (options.include_episode) cases.push_back(episode_case(in));

  GradCheckSuiteResult result;
  result.passed = true;
  for (auto& c : cases) {
    GradCheckReport r = grad_check(c.f, c.params, options.step, options.tol, options.floor);
    result.max_rel_error = std::max(result.max_rel_error, r.max_rel_error);
    result.passed = result.passed && r.passed;
    result.cases.push_back({c.name, r});
  }
  Tape::current().clear();
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace hcfsln
