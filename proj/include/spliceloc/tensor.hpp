// ----------------------------------------------------------------------------
// Copyright 2026 The spliceloc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spliceloc/rng.hpp"

namespace spliceloc::ad {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string shape_string(const Shape& shape);

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until something flows into it
  bool requires_grad = false;
  std::function<void(Node&)> backward;

  std::vector<T>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
    return grad;
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, T value, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<T> values, bool requires_grad = false);
  /// Uniform in [-bound, bound].
  static Tensor uniform(const Shape& shape, T bound, Rng& rng, bool requires_grad = true);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }
  std::vector<T>& data() { return node_->value; }
  const std::vector<T>& data() const { return node_->value; }
  /// Gradient buffer; allocated (zeros) on first access.
  std::vector<T>& grad() { return node_->ensure_grad(); }
  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->value.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  void zero_grad() { node_->grad.assign(node_->value.size(), T(0)); }
  T item() const;

  const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Records differentiable operations in creation order. Operations executed
/// while no tape is active are not recorded (inference mode).
template <typename T>
class Tape {
 public:
  void record(std::shared_ptr<Node<T>> node) { nodes_.push_back(std::move(node)); }
  /// Seeds d(root)/d(root) = 1 and runs every recorded backward rule once, in
  /// reverse creation order. The tape is cleared afterwards.
  void backward(const Tensor<T>& root);
  void clear() { nodes_.clear(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  /// Nodes visited by the most recent backward pass.
  std::size_t last_visits() const noexcept { return visits_; }

  static Tape* current() noexcept;

 private:
  template <typename>
  friend class TapeScope;
  static Tape*& current_slot() noexcept;

  std::vector<std::shared_ptr<Node<T>>> nodes_;
  std::size_t visits_ = 0;
};

/// Makes `tape` the active tape of this thread for the scope's lifetime.
template <typename T>
class TapeScope {
 public:
  explicit TapeScope(Tape<T>& tape) : previous_(Tape<T>::current_slot()) { Tape<T>::current_slot() = &tape; }
  ~TapeScope() { Tape<T>::current_slot() = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<T>* previous_;
};

// ---------------------------------------------------------------------------
// Operations

/// a[..., m, k] x b[..., k, n] (or b[..., n, k] with transpose_b). Batch
/// extents must match, or b may be rank 2 and is shared across the batch.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b = false);

/// Elementwise a + b; b broadcasts against a (right-aligned extents equal or 1).
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <typename T>
Tensor<T> relu(const Tensor<T>& a);

/// Max-subtracted softmax along `axis` (negative counts from the end). Rows
/// that are entirely -inf produce zeros.
template <typename T>
Tensor<T> softmax(const Tensor<T>& a, int axis = -1);

/// Normalizes over the last axis, then applies gain and bias of that extent.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps = T(1e-5));

/// Rows of `table` [V, d] gathered by `ids`; result shape index_shape + [d].
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, const std::vector<int>& ids, const Shape& index_shape);

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, const Shape& shape);

/// Output axis i is input axis perm[i].
template <typename T>
Tensor<T> permute(const Tensor<T>& a, const std::vector<std::size_t>& perm);

/// Inverted dropout; identity when !training or p == 0.
template <typename T>
Tensor<T> dropout(const Tensor<T>& a, T p, Rng& rng, bool training);

/// Mean of -log softmax(logits[i])[targets[i]] over positions whose target is
/// not `ignore_index`. logits: [N, V]. Throws Contract if every target is ignored.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& targets, int ignore_index);

/// Scalar sum_i w_i a_i.
template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& a, const std::vector<T>& weights);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);

}  // namespace spliceloc::ad
