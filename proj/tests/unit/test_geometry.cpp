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

#include <cmath>
#include <random>
#include <vector>

#include "hcfsln/geometry.hpp"

using namespace hcfsln;
using namespace hcfsln::geometry;

namespace {

PoincarePoint pt(std::vector<double> v) {
  const std::size_t n = v.size();
  return PoincarePoint(Tensor::from({n}, std::move(v)));
}

// Closed-form distance in plain doubles.
double oracle_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0, nb = 0, diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] * a[i];
    nb += b[i] * b[i];
    diff += (a[i] - b[i]) * (a[i] - b[i]);
  }
  const double u = 1.0 + 2.0 * diff / ((1.0 - na) * (1.0 - nb));
  return std::log(u + std::sqrt(u * u - 1.0));
}

std::vector<double> random_in_ball(std::mt19937_64& rng, std::size_t d, double max_norm) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(d);
  double n = 0;
  for (auto& x : v) {
    x = n01(rng);
    n += x * x;
  }
  const double r = max_norm * u(rng);
  for (auto& x : v) x *= r / std::sqrt(n);
  return v;
}

// Softmax(-d)-weighted prototype in plain doubles, before clipping.
std::vector<double> oracle_prototype(const std::vector<std::vector<double>>& pts,
                                     std::vector<double>* weights_out = nullptr) {
  const std::size_t d = pts[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& p : pts)
    for (std::size_t i = 0; i < d; ++i) mean[i] += p[i] / pts.size();
  std::vector<double> w;
  double z = 0.0;
  for (const auto& p : pts) {
    w.push_back(std::exp(-oracle_distance(p, mean)));
    z += w.back();
  }
  std::vector<double> out(d, 0.0);
  for (std::size_t j = 0; j < pts.size(); ++j) {
    w[j] /= z;
    for (std::size_t i = 0; i < d; ++i) out[i] += w[j] * pts[j][i];
  }
  if (weights_out) *weights_out = w;
  return out;
}

}  // namespace

TEST_CASE("PoincarePoint rejects points outside the open ball") {
  CHECK_NOTHROW(pt({0.5, 0.5}));
  CHECK_THROWS_AS(pt({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(pt({0.8, 0.8}), DomainError);
}

TEST_CASE("projection examples") {
  const Tensor one = Tensor::scalar(1.0);
  const PoincarePoint zero = project(Tensor::zeros({3}), one);
  CHECK(zero.norm() == 0.0);

  const PoincarePoint far = project(Tensor::from({2}, {10.0, 0.0}), one);
  CHECK(std::tanh(10.0) > kMaxNorm);
  CHECK(far.coords().at(0) == doctest::Approx(kMaxNorm).epsilon(1e-15));
  CHECK(far.coords().at(1) == 0.0);
  CHECK(far.within_margin());

  const Tensor h = Tensor::from({2}, {0.3, -0.2});
  const PoincarePoint p1 = project(h, one);
  const PoincarePoint p2 = project(scale(h, 2.0), one);
  CHECK(p2.norm() > p1.norm());
  CHECK(p1.coords().at(0) / p1.coords().at(1) == doctest::Approx(-1.5));
  CHECK(p2.coords().at(0) / p2.coords().at(1) == doctest::Approx(-1.5));
  const double n = std::sqrt(0.13);
  CHECK(p1.norm() == doctest::Approx(std::tanh(n)).epsilon(1e-14));
  const PoincarePoint pa = project(h, Tensor::scalar(2.0));
  CHECK(pa.norm() == doctest::Approx(std::tanh(2.0 * n)).epsilon(1e-14));
}

TEST_CASE("projection series branch is continuous with the direct formula") {
  const double alpha = 1.7;
  for (double n : {1e-6, 5e-5, 1e-4 / alpha, 2e-4}) {
    const PoincarePoint p = project(Tensor::from({1}, {n}), Tensor::scalar(alpha));
    CHECK(p.coords().at(0) == doctest::Approx(std::tanh(alpha * n)).epsilon(1e-14));
  }
}

TEST_CASE("distance examples") {
  CHECK(poincare_distance(pt({0, 0}), pt({0, 0})).item() < 1e-7);
  const double d = poincare_distance(pt({0.5, 0.0}), pt({0.0, 0.0})).item();
  CHECK(d == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(d == doctest::Approx(2.0 * std::atanh(0.5)).epsilon(1e-12));
}

TEST_CASE("distance from the origin is 2 artanh |x| for 1000 random points") {
  std::mt19937_64 rng(101);
  const PoincarePoint origin = pt(std::vector<double>(8, 0.0));
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = random_in_ball(rng, 8, 0.9);
    double n = 0;
    for (double v : x) n += v * v;
    const double expect = 2.0 * std::atanh(std::sqrt(n));
    const double got = poincare_distance(origin, pt(x)).item();
    worst = std::max(worst, std::abs(got - expect));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("distance is symmetric, agrees with the closed form and obeys the triangle inequality") {
  std::mt19937_64 rng(202);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_in_ball(rng, 6, 0.95);
    const auto b = random_in_ball(rng, 6, 0.95);
    const auto c = random_in_ball(rng, 6, 0.95);
    const double ab = poincare_distance(pt(a), pt(b)).item();
    const double ba = poincare_distance(pt(b), pt(a)).item();
    const double bc = poincare_distance(pt(b), pt(c)).item();
    const double ac = poincare_distance(pt(a), pt(c)).item();
    CHECK(ab == ba);
    CHECK(ab == doctest::Approx(oracle_distance(a, b)).epsilon(1e-10));
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("weighted prototype examples") {
  SUBCASE("single point") {
    const auto wp = weighted_prototype({pt({0.2, -0.4})});
    CHECK(wp.weights.at(0) == doctest::Approx(1.0));
    CHECK(wp.point.coords().at(0) == doctest::Approx(0.2));
    CHECK(wp.point.coords().at(1) == doctest::Approx(-0.4));
  }
  SUBCASE("symmetric pair") {
    const auto wp = weighted_prototype({pt({0.3, 0.0}), pt({-0.3, 0.0})});
    CHECK(wp.weights.at(0) == doctest::Approx(0.5));
    CHECK(wp.weights.at(1) == doctest::Approx(0.5));
    CHECK(wp.point.norm() < 1e-15);
  }
  SUBCASE("three collinear points") {
    const std::vector<std::vector<double>> raw{{0.1, 0.0}, {0.2, 0.0}, {0.6, 0.0}};
    std::vector<double> w;
    const auto expect = oracle_prototype(raw, &w);
    const auto wp = weighted_prototype({pt(raw[0]), pt(raw[1]), pt(raw[2])});
    const double x = wp.point.coords().at(0);
    CHECK(x > 0.1);
    CHECK(x < 0.6);
    CHECK(x == doctest::Approx(expect[0]).epsilon(1e-12));
    // Unweighted mean is 0.3: the two nearer points outweigh the far one.
    CHECK(wp.weights.at(1) > wp.weights.at(2));
    CHECK(wp.weights.at(0) > wp.weights.at(2));
    for (int i = 0; i < 3; ++i) CHECK(wp.weights.at(i) == doctest::Approx(w[i]).epsilon(1e-12));
  }
  SUBCASE("identical points") {
    std::vector<PoincarePoint> same(5, pt({0.1, 0.7}));
    const auto wp = weighted_prototype(same);
    CHECK(wp.point.coords().at(1) == doctest::Approx(0.7));
  }
  CHECK_THROWS_AS(weighted_prototype({}), std::invalid_argument);
}

TEST_CASE("clip_to_ball keeps direction and respects the margin") {
  const Tensor y = clip_to_ball(Tensor::from({2}, {3.0, 4.0}));
  CHECK(euclidean_norm(y.values()) == doctest::Approx(kMaxNorm).epsilon(1e-15));
  CHECK(y.at(0) / y.at(1) == doctest::Approx(0.75));
  const Tensor inside = clip_to_ball(Tensor::from({2}, {0.3, 0.4}));
  CHECK(inside.at(0) == 0.3);
}

TEST_CASE("residual block examples") {
  const Tensor one = Tensor::scalar(1.0);
  const auto zero_block = ResidualBlock::zeros(2);
  CHECK(residual_hyperbolic_block(pt({0, 0}), zero_block, one).norm() == 0.0);
  const auto out = residual_hyperbolic_block(pt({0.3, 0}), zero_block, one);
  CHECK(out.coords().at(0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-14));
  CHECK(out.coords().at(0) == doctest::Approx(0.29131).epsilon(1e-5));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> w(16), b(4);
    for (auto& v : w) v = 5.0 * n01(rng);
    for (auto& v : b) v = 5.0 * n01(rng);
    const ResidualBlock block{Tensor::from({4, 4}, w), Tensor::from({4}, b)};
    const auto y = pt(random_in_ball(rng, 4, 0.99));
    CHECK(residual_hyperbolic_block(y, block, Tensor::scalar(3.0)).norm() < 1.0);
  }
}

TEST_CASE("curvature stays positive") {
  Curvature c(0.5, false);
  CHECK(c.value() == doctest::Approx(0.5));
  CHECK_FALSE(c.trainable());
  CHECK(c.alpha().item() > 0.0);
  CHECK(Curvature(2.0).trainable());
}
