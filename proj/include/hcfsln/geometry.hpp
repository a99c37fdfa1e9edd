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

#ifndef HCFSLN_GEOMETRY_HPP_
#define HCFSLN_GEOMETRY_HPP_

#include <vector>

#include "hcfsln/tensor.hpp"

// Poincare-ball operations used by the hyperbolic embedding head.

namespace hcfsln::geometry {

// Every point this module emits has norm <= kMaxNorm.
inline constexpr double kBallMargin = 1e-5;
inline constexpr double kMaxNorm = 1.0 - kBallMargin;
// Slack for floating-point rounding when asserting the margin.
inline constexpr double kNormSlack = 1e-12;

double euclidean_norm(std::span<const double> v);

// A rank-1 tensor with Euclidean norm < 1.
class PoincarePoint {
 public:
  // Throws DomainError when coords is not rank 1 or its norm is >= 1.
  explicit PoincarePoint(Tensor coords);

  const Tensor& coords() const { return coords_; }
  std::size_t dim() const { return coords_.size(); }
  double norm() const { return euclidean_norm(coords_.values()); }
  bool within_margin() const { return norm() <= kMaxNorm + kNormSlack; }

 private:
  Tensor coords_;
};

// alpha = exp(rho); rho is the stored parameter, so alpha > 0 always.
class Curvature {
 public:
  explicit Curvature(double alpha = 1.0, bool trainable = true);

  // Differentiable scalar alpha.
  Tensor alpha() const;
  double value() const;
  const Tensor& log_alpha() const { return rho_; }
  bool trainable() const { return rho_.requires_grad(); }

 private:
  Tensor rho_;
};

// y = tanh(alpha |h|) h / |h|, norm clipped to kMaxNorm; project(0) = 0.
PoincarePoint project(const Tensor& h, const Tensor& alpha);

// Rescales y onto the kMaxNorm sphere when it lies outside it; identity
// otherwise. Direction is preserved.
Tensor clip_to_ball(const Tensor& y);

// acosh(1 + 2|a-b|^2 / ((1-|a|^2)(1-|b|^2))), unit curvature.
Tensor poincare_distance(const PoincarePoint& a, const PoincarePoint& b);

struct WeightedPrototype {
  PoincarePoint point;
  Tensor weights;  // [n], softmax of -d(y_i, mean)
};

// Unweighted mean first, then the softmax(-distance)-weighted sum of the
// points, clipped back into the margin. Throws std::invalid_argument for an
// empty list.
WeightedPrototype weighted_prototype(const std::vector<PoincarePoint>& points);

struct ResidualBlock {
  Tensor weight;  // [d, d]
  Tensor bias;    // [d]

  static ResidualBlock zeros(std::size_t dim);
};

// project(tanh(y W + b) + y, alpha)
PoincarePoint residual_hyperbolic_block(const PoincarePoint& y,
                                        const ResidualBlock& block,
                                        const Tensor& alpha);

}  // namespace hcfsln::geometry

#endif  // HCFSLN_GEOMETRY_HPP_
