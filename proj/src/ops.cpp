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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hcfsln/kernels.hpp"
#include "hcfsln/tensor.hpp"

namespace hcfsln {
namespace detail {
void note_acosh_clamp();
}

namespace kern = kernels::omp;

namespace {

bool is_suffix(const Shape& full, const Shape& tail) {
  if (tail.size() > full.size()) return false;
  return std::equal(tail.rbegin(), tail.rend(), full.rbegin());
}

void require(bool ok, std::string_view op, const std::string& what) {
  if (!ok) throw ShapeError(std::string(op) + ": " + what);
}

void require_rank(const Tensor& x, std::size_t rank, std::string_view op) {
  require(x.rank() == rank, op,
          "expected rank " + std::to_string(rank) + ", got " +
              shape_string(x.shape()));
}

// Elementwise binary op with leading-axis expansion of b. da/db give the
// partial derivatives from (a_i, b_i, out_i).
template <class F, class DA, class DB>
Tensor binary(std::string_view name, const Tensor& a, const Tensor& b, F f,
              DA da, DB db) {
  require(is_suffix(a.shape(), b.shape()), name,
          "shape " + shape_string(b.shape()) + " cannot expand to " +
              shape_string(a.shape()));
  const auto av = a.values();
  const auto bv = b.values();
  const std::size_t n = av.size();
  const std::size_t nb = bv.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[i], bv[i % nb]);
  auto outv = out;
  return make_op(name, a.shape(), std::move(out), {a, b},
                 [a, b, outv = std::move(outv), da, db](GradSink& s) {
                   const auto g = s.output_grad();
                   const auto av = a.values();
                   const auto bv = b.values();
                   const std::size_t nb = bv.size();
                   if (s.wants(0)) {
                     auto ga = s.input_grad(0);
                     for (std::size_t i = 0; i < g.size(); ++i)
                       ga[i] += g[i] * da(av[i], bv[i % nb], outv[i]);
                   }
                   if (s.wants(1)) {
                     auto gb = s.input_grad(1);
                     for (std::size_t i = 0; i < g.size(); ++i)
                       gb[i % nb] += g[i] * db(av[i], bv[i % nb], outv[i]);
                   }
                 });
}

// Elementwise unary op; df receives (x_i, y_i).
template <class F, class DF>
Tensor unary(std::string_view name, const Tensor& x, F f, DF df) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
  auto outv = out;
  return make_op(name, x.shape(), std::move(out), {x},
                 [x, outv = std::move(outv), df](GradSink& s) {
                   const auto g = s.output_grad();
                   const auto xv = x.values();
                   auto gx = s.input_grad(0);
                   for (std::size_t i = 0; i < g.size(); ++i)
                     gx[i] += g[i] * df(xv[i], outv[i]);
                 });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      "div", a, b, [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double o) { return -o / y; });
}

Tensor add_scalar(const Tensor& x, double c) {
  return unary(
      "add_scalar", x, [c](double v) { return v + c; },
      [](double, double) { return 1.0; });
}

Tensor scale(const Tensor& x, double c) {
  return unary(
      "scale", x, [c](double v) { return v * c; },
      [c](double, double) { return c; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor square(const Tensor& x) {
  return unary(
      "square", x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor sqrt(const Tensor& x) {
  for (double v : x.values()) {
    if (v < 0.0) throw DomainError("sqrt: negative argument");
  }
  return unary(
      "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return 0.5 / y; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.values()) {
    if (v <= 0.0) throw DomainError("log: non-positive argument");
  }
  return unary(
      "log", x, [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& x) {
  return unary(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

namespace {
constexpr double kAcoshFloor = 1.0 + 1e-15;
constexpr double kAcoshTolerance = 1e-12;
}  // namespace

Tensor acosh(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v >= 1.0 - kAcoshTolerance)) {
      throw DomainError("acosh: argument " + std::to_string(v) +
                        " below 1 (hyperbolic invariant broken upstream)");
    }
    if (v < kAcoshFloor) detail::note_acosh_clamp();
  }
  return unary(
      "acosh", x,
      [](double v) { return std::acosh(std::max(v, kAcoshFloor)); },
      [](double v, double) {
        if (v < kAcoshFloor) return 0.0;
        return 1.0 / std::sqrt((v - 1.0) * (v + 1.0));
      });
}

Tensor map_unary(const Tensor& x, std::function<double(double)> f,
                 std::function<double(double)> df, std::string_view name) {
  return unary(
      name, x, [f](double v) { return f(v); },
      [df](double v, double) { return df(v); });
}

Tensor sum(const Tensor& x) {
  const auto xv = x.values();
  const double s = std::accumulate(xv.begin(), xv.end(), 0.0);
  return make_op("sum", {}, {s}, {x}, [](GradSink& s) {
    const double g = s.output_grad()[0];
    for (auto& v : s.input_grad(0)) v += g;
  });
}

Tensor mean(const Tensor& x) {
  const auto xv = x.values();
  const double n = static_cast<double>(xv.size());
  const double m = std::accumulate(xv.begin(), xv.end(), 0.0) / n;
  return make_op("mean", {}, {m}, {x}, [n](GradSink& s) {
    const double g = s.output_grad()[0] / n;
    for (auto& v : s.input_grad(0)) v += g;
  });
}

Tensor sum_squares(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return make_op("sum_squares", {}, {s}, {x}, [x](GradSink& s) {
    const double g = s.output_grad()[0];
    const auto xv = x.values();
    auto gx = s.input_grad(0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * g * xv[i];
  });
}

Tensor dot(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), "dot",
          "size mismatch " + shape_string(a.shape()) + " vs " +
              shape_string(b.shape()));
  const auto av = a.values();
  const auto bv = b.values();
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
  return make_op("dot", {}, {s}, {a, b}, [a, b](GradSink& s) {
    const double g = s.output_grad()[0];
    if (s.wants(0)) {
      auto ga = s.input_grad(0);
      const auto bv = b.values();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * bv[i];
    }
    if (s.wants(1)) {
      auto gb = s.input_grad(1);
      const auto av = a.values();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * av[i];
    }
  });
}

Tensor mean_rows(const Tensor& x) {
  require_rank(x, 2, "mean_rows");
  const std::size_t rows = x.dim(0);
  const std::size_t cols = x.dim(1);
  const auto xv = x.values();
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c] += xv[r * cols + c];
  const double inv = 1.0 / static_cast<double>(rows);
  for (auto& v : out) v *= inv;
  return make_op("mean_rows", {cols}, std::move(out), {x},
                 [rows, cols, inv](GradSink& s) {
                   const auto g = s.output_grad();
                   auto gx = s.input_grad(0);
                   for (std::size_t r = 0; r < rows; ++r)
                     for (std::size_t c = 0; c < cols; ++c)
                       gx[r * cols + c] += g[c] * inv;
                 });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_size(shape) == x.size(), "reshape",
          "cannot view " + shape_string(x.shape()) + " as " +
              shape_string(shape));
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_op("reshape", std::move(shape), std::move(out), {x},
                 [](GradSink& s) {
                   const auto g = s.output_grad();
                   auto gx = s.input_grad(0);
                   for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                 });
}

Tensor transpose(const Tensor& x) {
  require_rank(x, 2, "transpose");
  const std::size_t r = x.dim(0);
  const std::size_t c = x.dim(1);
  std::vector<double> out(r * c);
  kern::transpose(x.values(), out, r, c);
  return make_op("transpose", {c, r}, std::move(out), {x}, [r, c](GradSink& s) {
    const auto g = s.output_grad();
    auto gx = s.input_grad(0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += g[j * r + i];
  });
}

Tensor row(const Tensor& x, std::size_t i) {
  require_rank(x, 2, "row");
  require(i < x.dim(0), "row", "index out of range");
  const std::size_t cols = x.dim(1);
  const auto xv = x.values();
  std::vector<double> out(xv.begin() + i * cols, xv.begin() + (i + 1) * cols);
  return make_op("row", {cols}, std::move(out), {x}, [i, cols](GradSink& s) {
    const auto g = s.output_grad();
    auto gx = s.input_grad(0);
    for (std::size_t c = 0; c < cols; ++c) gx[i * cols + c] += g[c];
  });
}

Tensor element(const Tensor& x, std::size_t i) {
  require(i < x.size(), "element", "index out of range");
  return make_op("element", {}, {x.values()[i]}, {x}, [i](GradSink& s) {
    s.input_grad(0)[i] += s.output_grad()[0];
  });
}

Tensor stack(const std::vector<Tensor>& rows) {
  require(!rows.empty(), "stack", "no rows");
  const bool scalars = rows.front().rank() == 0;
  const std::size_t d = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (const auto& r : rows) {
    require(r.rank() == rows.front().rank() && r.rank() <= 1 && r.size() == d,
            "stack", "items must be scalars or rank-1 of equal length");
    out.insert(out.end(), r.values().begin(), r.values().end());
  }
  const std::size_t n = rows.size();
  Shape shape = scalars ? Shape{n} : Shape{n, d};
  return make_op("stack", std::move(shape), std::move(out), rows,
                 [n, d](GradSink& s) {
                   const auto g = s.output_grad();
                   for (std::size_t r = 0; r < n; ++r) {
                     if (!s.wants(r)) continue;
                     auto gr = s.input_grad(r);
                     for (std::size_t c = 0; c < d; ++c) gr[c] += g[r * d + c];
                   }
                 });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.rank() == 1 || a.rank() == 2, "matmul", "left operand rank 1 or 2");
  require(b.rank() == 1 || b.rank() == 2, "matmul", "right operand rank 1 or 2");
  const std::size_t m = a.rank() == 2 ? a.dim(0) : 1;
  const std::size_t k = a.rank() == 2 ? a.dim(1) : a.dim(0);
  const std::size_t kb = b.dim(0);
  const std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  require(k == kb, "matmul",
          "inner dimensions differ: " + shape_string(a.shape()) + " x " +
              shape_string(b.shape()));
  Shape shape;
  if (a.rank() == 2) shape.push_back(m);
  if (b.rank() == 2) shape.push_back(n);
  std::vector<double> out(m * n);
  kern::gemm(a.values(), b.values(), out, m, k, n);
  return make_op("matmul", std::move(shape), std::move(out), {a, b},
                 [a, b, m, k, n](GradSink& s) {
                   const auto g = s.output_grad();
                   if (s.wants(0))
                     kern::gemm_nt(g, b.values(), s.input_grad(0), m, n, k, true);
                   if (s.wants(1))
                     kern::gemm_tn(a.values(), g, s.input_grad(1), k, m, n, true);
                 });
}

Tensor softmax(const Tensor& x) {
  require(x.rank() >= 1, "softmax", "needs rank >= 1");
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / cols;
  std::vector<double> out(x.values().begin(), x.values().end());
  kern::softmax_rows(out, rows, cols);
  auto y = out;
  return make_op("softmax", x.shape(), std::move(out), {x},
                 [rows, cols, y = std::move(y)](GradSink& s) {
                   const auto g = s.output_grad();
                   auto gx = s.input_grad(0);
                   for (std::size_t r = 0; r < rows; ++r) {
                     const std::size_t o = r * cols;
                     double dotgy = 0.0;
                     for (std::size_t c = 0; c < cols; ++c) dotgy += g[o + c] * y[o + c];
                     for (std::size_t c = 0; c < cols; ++c)
                       gx[o + c] += y[o + c] * (g[o + c] - dotgy);
                   }
                 });
}

Tensor log_softmax(const Tensor& x) {
  require(x.rank() >= 1, "log_softmax", "needs rank >= 1");
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / cols;
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  std::vector<double> prob(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t o = r * cols;
    const double mx = *std::max_element(xv.begin() + o, xv.begin() + o + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(xv[o + c] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) {
      out[o + c] = xv[o + c] - lse;
      prob[o + c] = std::exp(out[o + c]);
    }
  }
  return make_op("log_softmax", x.shape(), std::move(out), {x},
                 [rows, cols, prob = std::move(prob)](GradSink& s) {
                   const auto g = s.output_grad();
                   auto gx = s.input_grad(0);
                   for (std::size_t r = 0; r < rows; ++r) {
                     const std::size_t o = r * cols;
                     double gs = 0.0;
                     for (std::size_t c = 0; c < cols; ++c) gs += g[o + c];
                     for (std::size_t c = 0; c < cols; ++c)
                       gx[o + c] += g[o + c] - prob[o + c] * gs;
                   }
                 });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  require(x.rank() == 1 || x.rank() == 2, "layer_norm", "rank 1 or 2 input");
  const std::size_t d = x.shape().back();
  const std::size_t rows = x.size() / d;
  require(gain.rank() == 1 && gain.size() == d && bias.rank() == 1 &&
              bias.size() == d,
          "layer_norm", "gain/bias must be [" + std::to_string(d) + "]");
  const auto xv = x.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> xhat(xv.size());
  std::vector<double> inv_std(rows);
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t o = r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += xv[o + c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (xv[o + c] - mu) * (xv[o + c] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat[o + c] = (xv[o + c] - mu) * inv_std[r];
      out[o + c] = xhat[o + c] * gv[c] + bv[c];
    }
  }
  return make_op(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [gain, rows, d, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](GradSink& s) {
        const auto g = s.output_grad();
        const auto gv = gain.values();
        if (s.wants(0)) {
          auto gx = s.input_grad(0);
          const double inv_d = 1.0 / static_cast<double>(d);
          for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t o = r * d;
            double m1 = 0.0;
            double m2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const double dxh = g[o + c] * gv[c];
              m1 += dxh;
              m2 += dxh * xhat[o + c];
            }
            m1 *= inv_d;
            m2 *= inv_d;
            for (std::size_t c = 0; c < d; ++c) {
              const double dxh = g[o + c] * gv[c];
              gx[o + c] += inv_std[r] * (dxh - m1 - xhat[o + c] * m2);
            }
          }
        }
        if (s.wants(1)) {
          auto gg = s.input_grad(1);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < d; ++c) gg[c] += g[r * d + c] * xhat[r * d + c];
        }
        if (s.wants(2)) {
          auto gb = s.input_grad(2);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < d; ++c) gb[c] += g[r * d + c];
        }
      });
}

Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng,
               bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must be in [0, 1)");
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = unif(rng) < rate ? 0.0 : keep_scale;
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return make_op("dropout", x.shape(), std::move(out), {x},
                 [mask = std::move(mask)](GradSink& s) {
                   const auto g = s.output_grad();
                   auto gx = s.input_grad(0);
                   for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
                 });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank(x, 2, "conv1d");
  require_rank(weight, 3, "conv1d");
  const std::size_t len = x.dim(0);
  const std::size_t cin = x.dim(1);
  const std::size_t width = weight.dim(0);
  const std::size_t cout = weight.dim(2);
  require(weight.dim(1) == cin, "conv1d",
          "weight " + shape_string(weight.shape()) + " expects " +
              std::to_string(weight.dim(1)) + " input channels, got " +
              std::to_string(cin));
  require(width % 2 == 1, "conv1d", "kernel width must be odd for same padding");
  require(width <= len, "conv1d",
          "kernel width " + std::to_string(width) + " exceeds sequence length " +
              std::to_string(len));
  require(bias.rank() == 1 && bias.size() == cout, "conv1d", "bias must be [cout]");
  const std::size_t kc = width * cin;
  std::vector<double> cols(len * kc);
  kern::im2col(x.values(), cols, len, cin, width);
  std::vector<double> out(len * cout);
  const auto bv = bias.values();
  for (std::size_t t = 0; t < len; ++t)
    std::copy(bv.begin(), bv.end(), out.begin() + t * cout);
  kern::gemm(cols, weight.values(), out, len, kc, cout, true);
  return make_op(
      "conv1d", {len, cout}, std::move(out), {x, weight, bias},
      [weight, len, cin, cout, width, kc, cols = std::move(cols)](GradSink& s) {
        const auto g = s.output_grad();
        if (s.wants(1)) kern::gemm_tn(cols, g, s.input_grad(1), kc, len, cout, true);
        if (s.wants(2)) {
          auto gb = s.input_grad(2);
          for (std::size_t t = 0; t < len; ++t)
            for (std::size_t o = 0; o < cout; ++o) gb[o] += g[t * cout + o];
        }
        if (s.wants(0)) {
          std::vector<double> gcols(len * kc);
          kern::gemm_nt(g, weight.values(), gcols, len, cout, kc);
          kern::col2im_add(gcols, s.input_grad(0), len, cin, width);
        }
      });
}

namespace {

void gather_head(std::span<const double> src, std::vector<double>& dst,
                 std::size_t tokens, std::size_t d, std::size_t off,
                 std::size_t dh) {
  dst.resize(tokens * dh);
  for (std::size_t t = 0; t < tokens; ++t)
    std::copy_n(src.begin() + t * d + off, dh, dst.begin() + t * dh);
}

void scatter_head_add(std::span<const double> src, std::span<double> dst,
                      std::size_t tokens, std::size_t d, std::size_t off,
                      std::size_t dh) {
  for (std::size_t t = 0; t < tokens; ++t)
    for (std::size_t c = 0; c < dh; ++c) dst[t * d + off + c] += src[t * dh + c];
}

}  // namespace

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 std::size_t heads) {
  require_rank(q, 2, "attention");
  require(q.shape() == k.shape() && q.shape() == v.shape(), "attention",
          "q, k, v must share a shape");
  const std::size_t tokens = q.dim(0);
  const std::size_t d = q.dim(1);
  require(heads >= 1 && d % heads == 0, "attention",
          "head count " + std::to_string(heads) + " must divide width " +
              std::to_string(d));
  const std::size_t dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<double> out(tokens * d);
  std::vector<double> probs(heads * tokens * tokens);
  std::vector<double> qh, kh, vh, oh(tokens * dh);
  for (std::size_t h = 0; h < heads; ++h) {
    gather_head(q.values(), qh, tokens, d, h * dh, dh);
    gather_head(k.values(), kh, tokens, d, h * dh, dh);
    gather_head(v.values(), vh, tokens, d, h * dh, dh);
    std::span<double> p(probs.data() + h * tokens * tokens, tokens * tokens);
    kern::gemm_nt(qh, kh, p, tokens, dh, tokens);
    for (auto& e : p) e *= sc;
    kern::softmax_rows(p, tokens, tokens);
    kern::gemm(p, vh, oh, tokens, tokens, dh);
    for (std::size_t t = 0; t < tokens; ++t)
      std::copy_n(oh.begin() + t * dh, dh, out.begin() + t * d + h * dh);
  }
  return make_op(
      "attention", {tokens, d}, std::move(out), {q, k, v},
      [q, k, v, tokens, d, heads, dh, sc, probs = std::move(probs)](GradSink& s) {
        const auto g = s.output_grad();
        std::vector<double> qh, kh, vh, gh, dp(tokens * tokens);
        std::vector<double> gq(tokens * dh), gk(tokens * dh), gv(tokens * dh);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t off = h * dh;
          std::span<const double> p(probs.data() + h * tokens * tokens,
                                    tokens * tokens);
          gather_head(g, gh, tokens, d, off, dh);
          gather_head(v.values(), vh, tokens, d, off, dh);
          if (s.wants(2)) {
            kern::gemm_tn(p, gh, gv, tokens, tokens, dh);
            scatter_head_add(gv, s.input_grad(2), tokens, d, off, dh);
          }
          if (!s.wants(0) && !s.wants(1)) continue;
          kern::gemm_nt(gh, vh, dp, tokens, dh, tokens);
          for (std::size_t r = 0; r < tokens; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < tokens; ++c)
              acc += dp[r * tokens + c] * p[r * tokens + c];
            for (std::size_t c = 0; c < tokens; ++c) {
              const std::size_t i = r * tokens + c;
              dp[i] = p[i] * (dp[i] - acc) * sc;
            }
          }
          if (s.wants(0)) {
            gather_head(k.values(), kh, tokens, d, off, dh);
            kern::gemm(dp, kh, gq, tokens, tokens, dh);
            scatter_head_add(gq, s.input_grad(0), tokens, d, off, dh);
          }
          if (s.wants(1)) {
            gather_head(q.values(), qh, tokens, d, off, dh);
            kern::gemm_tn(dp, qh, gk, tokens, tokens, dh);
            scatter_head_add(gk, s.input_grad(1), tokens, d, off, dh);
          }
        }
      });
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
  require(a.size() == b.size(), "cosine_similarity",
          "size mismatch " + shape_string(a.shape()) + " vs " +
              shape_string(b.shape()));
  const auto av = a.values();
  const auto bv = b.values();
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    ab += av[i] * bv[i];
    aa += av[i] * av[i];
    bb += bv[i] * bv[i];
  }
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  const bool degenerate = na < eps || nb < eps;
  const double c = degenerate ? 0.0 : ab / (na * nb);
  return make_op("cosine_similarity", {}, {c}, {a, b},
                 [a, b, na, nb, c, degenerate](GradSink& s) {
                   if (degenerate) return;
                   const double g = s.output_grad()[0];
                   const auto av = a.values();
                   const auto bv = b.values();
                   const double inv = 1.0 / (na * nb);
                   if (s.wants(0)) {
                     auto ga = s.input_grad(0);
                     for (std::size_t i = 0; i < ga.size(); ++i)
                       ga[i] += g * (bv[i] * inv - c * av[i] / (na * na));
                   }
                   if (s.wants(1)) {
                     auto gb = s.input_grad(1);
                     for (std::size_t i = 0; i < gb.size(); ++i)
                       gb[i] += g * (av[i] * inv - c * bv[i] / (nb * nb));
                   }
                 });
}

}  // namespace hcfsln
