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

#include "hcfsln/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace hcfsln::geometry {

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

PoincarePoint::PoincarePoint(Tensor coords) : coords_(std::move(coords)) {
  if (!coords_.defined() || coords_.rank() != 1) {
    throw DomainError("PoincarePoint: coordinates must be a rank-1 tensor");
  }
  const double n = norm();
  if (!(n < 1.0)) {
    throw DomainError("PoincarePoint: norm " + std::to_string(n) +
                      " is outside the open unit ball");
  }
}

Curvature::Curvature(double alpha, bool trainable) {
  if (!(alpha > 0.0)) throw std::invalid_argument("Curvature: alpha must be > 0");
  rho_ = Tensor::scalar(std::log(alpha), trainable);
}

Tensor Curvature::alpha() const { return hcfsln::exp(rho_); }
double Curvature::value() const { return std::exp(rho_.item()); }

namespace {

// Gradient of y = c * h / |h| w.r.t. h for constant c.
void radial_rescale_backward(std::span<const double> gy,
                             std::span<const double> h, double n, double c,
                             std::span<double> gh) {
  double gdoth = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) gdoth += gy[i] * h[i];
  const double n3 = n * n * n;
  for (std::size_t i = 0; i < h.size(); ++i)
    gh[i] += c * (gy[i] / n - gdoth * h[i] / n3);
}

}  // namespace

PoincarePoint project(const Tensor& h, const Tensor& alpha) {
  if (h.rank() != 1) throw ShapeError("project: h must be rank 1");
  if (alpha.size() != 1) throw ShapeError("project: alpha must be a scalar");
  const double a = alpha.item();
  if (!(a > 0.0)) throw DomainError("project: alpha must be > 0");
  const auto hv = h.values();
  const double n = euclidean_norm(hv);
  const double t = std::tanh(a * n);
  const bool clipped = t > kMaxNorm;

  std::vector<double> y(hv.size());
  if (clipped) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = kMaxNorm * hv[i] / n;
  } else if (n > 0.0) {
    const double g = t / n;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = g * hv[i];
  }
  // n == 0 leaves the origin.

  Tensor out = make_op(
      "project", h.shape(), std::move(y), {h, alpha},
      [h, a, n, t, clipped](GradSink& s) {
        const auto gy = s.output_grad();
        const auto hv = h.values();
        if (clipped) {
          if (s.wants(0)) radial_rescale_backward(gy, hv, n, kMaxNorm, s.input_grad(0));
          return;
        }
        double gdoth = 0.0;
        for (std::size_t i = 0; i < hv.size(); ++i) gdoth += gy[i] * hv[i];
        if (s.wants(0)) {
          // y = g(n) h with g(n) = tanh(a n) / n.
          const double x = a * n;
          double g;
          double gprime_over_n;
          if (x > 1e-4) {
            g = t / n;
            const double sech2 = 1.0 - t * t;
            gprime_over_n = (x * sech2 - t) / (n * n * n);
          } else {
            // Series form; the closed form cancels catastrophically near 0.
            g = a * (1.0 - x * x / 3.0);
            gprime_over_n = a * a * a * (-2.0 / 3.0 + 8.0 / 15.0 * x * x);
          }
          auto gh = s.input_grad(0);
          for (std::size_t i = 0; i < hv.size(); ++i)
            gh[i] += g * gy[i] + gprime_over_n * gdoth * hv[i];
        }
        if (s.wants(1)) {
          s.input_grad(1)[0] += (1.0 - t * t) * gdoth;
        }
      });
  return PoincarePoint(std::move(out));
}

Tensor clip_to_ball(const Tensor& y) {
  if (y.rank() != 1) throw ShapeError("clip_to_ball: y must be rank 1");
  const auto yv = y.values();
  const double n = euclidean_norm(yv);
  if (n <= kMaxNorm) return y;
  std::vector<double> out(yv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kMaxNorm * yv[i] / n;
  return make_op("clip_to_ball", y.shape(), std::move(out), {y},
                 [y, n](GradSink& s) {
                   radial_rescale_backward(s.output_grad(), y.values(), n,
                                           kMaxNorm, s.input_grad(0));
                 });
}

Tensor poincare_distance(const PoincarePoint& a, const PoincarePoint& b) {
  const Tensor& ya = a.coords();
  const Tensor& yb = b.coords();
  if (ya.size() != yb.size()) {
    throw ShapeError("poincare_distance: dimension mismatch " +
                     shape_string(ya.shape()) + " vs " + shape_string(yb.shape()));
  }
  const Tensor sq_diff = sum_squares(sub(ya, yb));
  const Tensor conf_a = add_scalar(neg(sum_squares(ya)), 1.0);
  const Tensor conf_b = add_scalar(neg(sum_squares(yb)), 1.0);
  const Tensor ratio = div(scale(sq_diff, 2.0), mul(conf_a, conf_b));
  return hcfsln::acosh(add_scalar(ratio, 1.0));
}

WeightedPrototype weighted_prototype(const std::vector<PoincarePoint>& points) {
  if (points.empty()) {
    throw std::invalid_argument("weighted_prototype: empty point list");
  }
  std::vector<Tensor> rows;
  rows.reserve(points.size());
  for (const auto& p : points) rows.push_back(p.coords());
  const Tensor ys = stack(rows);
  const PoincarePoint centre(mean_rows(ys));
  std::vector<Tensor> dists;
  dists.reserve(points.size());
  for (const auto& p : points) dists.push_back(poincare_distance(p, centre));
  const Tensor weights = softmax(neg(stack(dists)));
  const Tensor combined = matmul(weights, ys);
  return {PoincarePoint(clip_to_ball(combined)), weights};
}

ResidualBlock ResidualBlock::zeros(std::size_t dim) {
  return {Tensor::zeros({dim, dim}, true), Tensor::zeros({dim}, true)};
}

PoincarePoint residual_hyperbolic_block(const PoincarePoint& y,
                                        const ResidualBlock& block,
                                        const Tensor& alpha) {
  const Tensor& yc = y.coords();
  const Tensor transformed = hcfsln::tanh(add(matmul(yc, block.weight), block.bias));
  return project(add(transformed, yc), alpha);
}

}  // namespace hcfsln::geometry
