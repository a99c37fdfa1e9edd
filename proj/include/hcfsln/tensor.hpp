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

#ifndef HCFSLN_TENSOR_HPP_
#define HCFSLN_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hcfsln {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced by a primitive, or a differentiation-protocol misuse.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

namespace detail {
struct Node;
}

class GradSink;
class Tape;

// Reference-counted handle to a dense row-major float64 array. Copies share
// storage. Values are fixed once an op has produced them; only leaves
// (parameters) may be mutated, and only between tapes.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const;

  std::span<const double> values() const;
  double item() const;
  double at(std::size_t flat_index) const { return values()[flat_index]; }

  bool requires_grad() const;
  bool is_leaf() const;

  // Empty span until a backward pass has reached this tensor.
  std::span<const double> grad() const;
  // Leaf-only: lets optimizers rescale gradients in place. Allocates a
  // zero gradient when none exists yet.
  std::span<double> mutable_grad();
  void zero_grad();

  // Leaf-only mutation: optimizer updates, initialization, perturbation.
  std::span<double> mutable_values();
  void set_requires_grad(bool flag);

  const detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend class Tape;
  friend class GradSink;
  friend Tensor make_op(std::string_view, Shape, std::vector<double>,
                        std::vector<Tensor>, std::function<void(GradSink&)>);
};

// Handed to backward closures: read the output gradient, accumulate into
// input gradients.
class GradSink {
 public:
  std::span<const double> output_grad() const { return out_grad_; }
  bool wants(std::size_t input) const;
  std::span<double> input_grad(std::size_t input);

 private:
  GradSink(std::span<const double> out_grad, const std::vector<Tensor>* inputs)
      : out_grad_(out_grad), inputs_(inputs) {}
  std::span<const double> out_grad_;
  const std::vector<Tensor>* inputs_;
  friend class Tape;
};

using BackwardFn = std::function<void(GradSink&)>;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// Builds a primitive result. Rejects non-finite values. When any input
// requires grad (and grad mode is on) the op is appended to the calling
// thread's tape with `backward` as its adjoint rule.
Tensor make_op(std::string_view name, Shape shape, std::vector<double> values,
               std::vector<Tensor> inputs, BackwardFn backward);

// Define-by-run record of one forward pass. One tape per thread.
class Tape {
 public:
  static Tape& current();

  // Seeds d(loss)/d(loss) = 1 and runs every recorded adjoint once, newest
  // first, then clears the tape. Leaf gradients accumulate.
  void backward(const Tensor& loss);
  void clear();
  std::size_t size() const { return entries_.size(); }
  std::uint64_t generation() const { return generation_; }

 private:
  struct Entry {
    std::string_view name;
    std::shared_ptr<detail::Node> output;
    std::vector<Tensor> inputs;
    BackwardFn backward;
  };
  void record(Entry entry);

  std::vector<Entry> entries_;
  std::uint64_t generation_ = 1;

  friend Tensor make_op(std::string_view, Shape, std::vector<double>,
                        std::vector<Tensor>, std::function<void(GradSink&)>);
};

// Disables recording on this thread for its lifetime.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// Number of acosh arguments clamped up to 1 + 1e-15 on this thread.
std::uint64_t acosh_clamp_count();
void reset_acosh_clamp_count();

// ---------------------------------------------------------------------------
// Primitives. Binary elementwise ops accept a second operand whose shape is a
// trailing suffix of the first (leading-axis expansion, including scalars);
// nothing else broadcasts.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& x, double c);
Tensor scale(const Tensor& x, double c);
Tensor neg(const Tensor& x);

Tensor square(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);
// Arguments in [1 - 1e-12, 1 + 1e-15) are clamped to 1 + 1e-15 (counted) and
// pass no gradient; anything lower is a DomainError.
Tensor acosh(const Tensor& x);

// Elementwise op from caller-supplied value and derivative.
Tensor map_unary(const Tensor& x, std::function<double(double)> f,
                 std::function<double(double)> df,
                 std::string_view name = "map_unary");

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor sum_squares(const Tensor& x);
Tensor dot(const Tensor& a, const Tensor& b);
// [rows, cols] -> [cols]
Tensor mean_rows(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor transpose(const Tensor& x);
// Row i of a rank-2 tensor, as rank 1.
Tensor row(const Tensor& x, std::size_t i);
// Flat element i, as a scalar.
Tensor element(const Tensor& x, std::size_t i);
// n scalars -> [n]; n equal-length rank-1 tensors -> [n, d].
Tensor stack(const std::vector<Tensor>& rows);

// [m,k] x [k,n] -> [m,n]; rank-1 right operand treated as [k,1] -> [m].
Tensor matmul(const Tensor& a, const Tensor& b);

// Softmax over the last axis.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// Per-row normalization of [rows, d] (or a single rank-1 row).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-8);

// Inverted dropout. Identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng,
               bool training);

// Same-padded 1-D convolution: x [len, cin], weight [width, cin, cout]
// (odd width <= len), bias [cout] -> [len, cout].
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Multi-head scaled dot-product attention. q, k, v are [tokens, d] with the
// head h owning columns [h*d/heads, (h+1)*d/heads).
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v,
                 std::size_t heads);

// a.b / (|a||b|), defined as 0 when either norm is below eps.
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = 1e-12);

}  // namespace hcfsln

#endif  // HCFSLN_TENSOR_HPP_
