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

#include "hcfsln/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hcfsln {
namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  // Tape generation that produced this node; 0 for leaves and untracked
  // results.
  const Tape* tape = nullptr;
  std::uint64_t generation = 0;
};

}  // namespace detail

namespace {

thread_local bool t_grad_mode = true;
thread_local std::uint64_t t_acosh_clamps = 0;

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values,
                    bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError("tensor: shape " + shape_string(shape) + " needs " +
                     std::to_string(shape_size(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= node_->shape.size()) {
    throw ShapeError("tensor: axis " + std::to_string(axis) +
                     " out of range for " + shape_string(node_->shape));
  }
  return node_->shape[axis];
}

std::size_t Tensor::size() const { return node_->data.size(); }

std::span<const double> Tensor::values() const { return node_->data; }

double Tensor::item() const {
  if (node_->data.size() != 1) {
    throw ShapeError("item(): tensor of shape " + shape_string(shape()) +
                     " is not a scalar");
  }
  return node_->data[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::is_leaf() const { return node_->leaf; }

std::span<const double> Tensor::grad() const { return node_->grad; }

std::span<double> Tensor::mutable_grad() {
  if (!node_->leaf) {
    throw NumericError("mutable_grad(): only leaf tensors expose mutable grads");
  }
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::span<double> Tensor::mutable_values() {
  if (!node_->leaf) {
    throw NumericError("mutable_values(): only leaf tensors may be mutated");
  }
  return node_->data;
}

void Tensor::set_requires_grad(bool flag) {
  if (!node_->leaf) {
    throw NumericError("set_requires_grad(): not a leaf tensor");
  }
  node_->requires_grad = flag;
}

bool GradSink::wants(std::size_t input) const {
  return (*inputs_)[input].node_->requires_grad;
}

std::span<double> GradSink::input_grad(std::size_t input) {
  auto& node = *(*inputs_)[input].node_;
  if (node.grad.size() != node.data.size()) node.grad.assign(node.data.size(), 0.0);
  return node.grad;
}

Tensor make_op(std::string_view name, Shape shape, std::vector<double> values,
               std::vector<Tensor> inputs, BackwardFn backward) {
  if (shape_size(shape) != values.size()) {
    throw ShapeError(std::string(name) + ": result shape " +
                     shape_string(shape) + " does not match value count");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(std::string(name) + ": non-finite output at index " +
                         std::to_string(i));
    }
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(values);
  node->leaf = false;
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any && t_grad_mode) {
    node->requires_grad = true;
    auto& tape = Tape::current();
    node->tape = &tape;
    node->generation = tape.generation_;
    tape.record({name, node, std::move(inputs), std::move(backward)});
  }
  return Tensor(std::move(node));
}

Tape& Tape::current() {
  thread_local Tape tape;
  return tape;
}

void Tape::record(Entry entry) { entries_.push_back(std::move(entry)); }

void Tape::clear() {
  entries_.clear();
  ++generation_;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw NumericError("backward(): loss must be a scalar, got shape " +
                       (loss.defined() ? shape_string(loss.shape()) : "<null>"));
  }
  const auto* node = loss.node_.get();
  if (node->tape != this || node->generation != generation_) {
    throw NumericError(
        "backward(): loss was not produced on the live tape (already "
        "differentiated, or recorded without grad)");
  }
  auto& seed = loss.node_->grad;
  seed.assign(1, 0.0);
  seed[0] = 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const auto& out = *it->output;
    if (out.grad.empty()) continue;
    GradSink sink(out.grad, &it->inputs);
    it->backward(sink);
  }
  clear();
}

NoGradScope::NoGradScope() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradScope::~NoGradScope() { t_grad_mode = previous_; }

bool grad_mode_enabled() { return t_grad_mode; }

std::uint64_t acosh_clamp_count() { return t_acosh_clamps; }
void reset_acosh_clamp_count() { t_acosh_clamps = 0; }

namespace detail {
void note_acosh_clamp() { ++t_acosh_clamps; }
}  // namespace detail

}  // namespace hcfsln
